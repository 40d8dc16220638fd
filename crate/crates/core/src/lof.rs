//! Local Outlier Factor over a precomputed distance matrix.
//!
//! Neighborhoods are inclusive: every point at exactly the k-distance is a
//! neighbor, so `|N_k(o)|` may exceed `k` and averages divide by `|N_k(o)|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Added to reachability sums so duplicated points keep a finite density.
pub const LRD_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LofParams {
    pub k: usize,
}

impl Default for LofParams {
    fn default() -> Self {
        LofParams { k: 10 }
    }
}

/// One LOF value per point, aligned with the distance matrix rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyScores(pub Vec<f64>);

impl AnomalyScores {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

struct Neighborhood {
    k_distance: f64,
    members: Vec<usize>,
}

fn neighborhood(d: &DistanceMatrix, o: usize, k: usize) -> Neighborhood {
    let row = d.row(o);
    let mut others: Vec<f64> = row
        .iter()
        .enumerate()
        .filter(|&(p, _)| p != o)
        .map(|(_, &v)| v)
        .collect();
    others.select_nth_unstable_by(k - 1, f64::total_cmp);
    let k_distance = others[k - 1];
    let members = row
        .iter()
        .enumerate()
        .filter(|&(p, &v)| p != o && v <= k_distance)
        .map(|(p, _)| p)
        .collect();
    Neighborhood {
        k_distance,
        members,
    }
}

pub fn lof_scores(d: &DistanceMatrix, params: LofParams) -> Result<AnomalyScores> {
    let k = params.k;
    if k == 0 {
        return Err(Error::InvalidK(k));
    }
    let size = d.size();
    if size < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            got: size,
        });
    }
    d.validate()?;

    let hoods: Vec<Neighborhood> = (0..size)
        .into_par_iter()
        .map(|o| neighborhood(d, o, k))
        .collect();

    let lrd: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|o| {
            let hood = &hoods[o];
            let reach: f64 = hood
                .members
                .iter()
                .map(|&p| hoods[p].k_distance.max(d.get(o, p)))
                .sum();
            hood.members.len() as f64 / (reach + LRD_EPSILON)
        })
        .collect();

    let scores = (0..size)
        .into_par_iter()
        .map(|o| {
            let hood = &hoods[o];
            let ratio: f64 = hood.members.iter().map(|&p| lrd[p] / lrd[o]).sum();
            ratio / hood.members.len() as f64
        })
        .collect();
    Ok(AnomalyScores(scores))
}
