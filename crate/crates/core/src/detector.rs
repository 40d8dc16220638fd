//! Single-model pipeline: partition → distances → LOF → sorted point
//! triples → per-actor fusion scores.

use std::cmp::Ordering;

use serde::{Serialize, Serializer};

use crate::corpus::{partition, ActorId, Corpus, Point};
use crate::distance::{distance_matrix, KernelChoice};
use crate::error::{Error, Result};
use crate::lof::{lof_scores, AnomalyScores, LofParams};

/// `(u, v, w)`: anomaly score, owning actor, point index within the actor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedTriple {
    pub score: f64,
    pub actor: ActorId,
    pub point: usize,
}

/// An actor with its fusion score held as an exact rational `mass / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankedActor {
    pub actor: ActorId,
    pub mass: u64,
}

/// Actors ordered most suspicious first.
///
/// Fusion scores are sums of integer rank weights divided by a common
/// denominator (`p` for point fusion, `T` for sub-model fusion), so they are
/// kept as integer numerators and ordering never depends on float rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActorRanking {
    entries: Vec<RankedActor>,
    denominator: u64,
}

impl ActorRanking {
    /// Sorts by mass descending, ties by actor index ascending.
    pub(crate) fn from_masses(masses: Vec<u64>, denominator: u64) -> Self {
        let mut entries: Vec<RankedActor> = masses
            .into_iter()
            .enumerate()
            .map(|(a, mass)| RankedActor {
                actor: ActorId(a),
                mass,
            })
            .collect();
        entries.sort_by(|a, b| b.mass.cmp(&a.mass).then(a.actor.cmp(&b.actor)));
        ActorRanking {
            entries,
            denominator,
        }
    }

    /// Builds a ranking from an explicit order (most suspicious first), scoring
    /// each actor `n + 1 − rank`.
    pub fn from_order(order: &[ActorId]) -> Result<Self> {
        let n = order.len();
        let mut masses = vec![0u64; n];
        let mut seen = vec![false; n];
        for (pos, &a) in order.iter().enumerate() {
            if a.0 >= n || std::mem::replace(&mut seen[a.0], true) {
                return Err(Error::Ranking(format!("{a} breaks the permutation")));
            }
            masses[a.0] = (n - pos) as u64;
        }
        Ok(ActorRanking::from_masses(masses, 1))
    }

    pub fn entries(&self) -> &[RankedActor] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn order(&self) -> Vec<ActorId> {
        self.entries.iter().map(|e| e.actor).collect()
    }

    pub fn score(&self, entry: &RankedActor) -> f64 {
        entry.mass as f64 / self.denominator as f64
    }

    /// `(actor, score)` pairs, most suspicious first.
    pub fn scores(&self) -> Vec<(ActorId, f64)> {
        self.entries
            .iter()
            .map(|e| (e.actor, self.score(e)))
            .collect()
    }

    pub fn score_of(&self, actor: ActorId) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.actor == actor)
            .map(|e| self.score(e))
    }

    /// 1-based position of `actor`.
    pub fn rank_of(&self, actor: ActorId) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.actor == actor)
            .map(|i| i + 1)
    }

    /// Sum of all numerators.
    pub fn total_mass(&self) -> u64 {
        self.entries.iter().map(|e| e.mass).sum()
    }
}

#[derive(Serialize)]
struct ScoredActor {
    actor: ActorId,
    score: f64,
}

impl Serialize for ActorRanking {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries.iter().map(|e| ScoredActor {
            actor: e.actor,
            score: self.score(e),
        }))
    }
}

/// Sorts points by anomaly score descending; ties by actor then point index.
pub fn rank_points(scores: &AnomalyScores, points: &[Point]) -> Result<Vec<RankedTriple>> {
    if scores.len() != points.len() {
        return Err(Error::LengthMismatch(scores.len(), points.len()));
    }
    let mut triples: Vec<RankedTriple> = scores
        .as_slice()
        .iter()
        .zip(points)
        .map(|(&score, pt)| RankedTriple {
            score,
            actor: pt.actor,
            point: pt.index,
        })
        .collect();
    triples.sort_by(compare_triples);
    Ok(triples)
}

fn compare_triples(a: &RankedTriple, b: &RankedTriple) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.actor.cmp(&b.actor))
        .then(a.point.cmp(&b.point))
}

/// Per-actor fusion over the sorted point list: the triple at 1-based
/// position `j` contributes `(pn + 1 − j) / p` to its actor.
pub fn fuse_actor_scores(triples: &[RankedTriple], n: usize, p: usize) -> Result<ActorRanking> {
    if p == 0 || n == 0 {
        return Err(Error::Config(format!("n={n} and p={p} must be positive")));
    }
    let total = n * p;
    if triples.len() != total {
        return Err(Error::LengthMismatch(triples.len(), total));
    }
    let mut masses = vec![0u64; n];
    let mut counts = vec![0usize; n];
    for (pos, t) in triples.iter().enumerate() {
        let a = t.actor.0;
        if a >= n {
            return Err(Error::Ranking(format!("{} outside n={n}", t.actor)));
        }
        masses[a] += (total - pos) as u64;
        counts[a] += 1;
    }
    if let Some((actor, &count)) = counts.iter().enumerate().find(|(_, &c)| c != p) {
        return Err(Error::ActorMultiplicity {
            actor,
            count,
            expected: p,
        });
    }
    Ok(ActorRanking::from_masses(masses, p as u64))
}

/// Runs the full single-model pipeline on a normalized corpus.
pub fn detect_single(
    corpus: &Corpus,
    p: usize,
    kernel: KernelChoice,
    lof: LofParams,
) -> Result<ActorRanking> {
    if !corpus.is_normalized() {
        return Err(Error::NotNormalized("detection"));
    }
    let points = partition(corpus, p)?;
    let kernel = kernel.resolve(corpus.dim())?;
    let distances = distance_matrix(&points, &kernel)?;
    let scores = lof_scores(&distances, lof)?;
    let triples = rank_points(&scores, &points)?;
    fuse_actor_scores(&triples, corpus.n(), p)
}
