//! Random-subspace ensemble: `T` sub-models, each running the single-model
//! detector on a random subset of `d ∈ [⌈H/2⌉, H−1]` feature components,
//! fused by averaging reversed ranks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::detector::{detect_single, ActorRanking};
use crate::distance::KernelChoice;
use crate::error::{Error, Result};
use crate::lof::LofParams;
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubModelSpec {
    pub index: usize,
    pub dimension: usize,
    /// Sorted, distinct component indices in `[0, H)`.
    pub components: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaggedRanking {
    #[serde(rename = "final")]
    pub final_ranking: ActorRanking,
    pub submodels: Vec<ActorRanking>,
    pub specs: Vec<SubModelSpec>,
}

/// Inclusive range of subspace dimensions for a `dim`-component feature space.
pub fn dimension_range(dim: usize) -> (usize, usize) {
    (dim.div_ceil(2), dim - 1)
}

/// Draws `t` subspace specs. Sub-model `i` uses its own generator seeded with
/// `derive_seed(master_seed, i)`, so specs do not depend on each other.
pub fn sample_subspaces(dim: usize, t: usize, master_seed: u64) -> Result<Vec<SubModelSpec>> {
    use rand::Rng;

    if dim < 2 {
        return Err(Error::Subspace(format!("need H >= 2, got H={dim}")));
    }
    if t == 0 {
        return Err(Error::Config("T must be at least 1".into()));
    }
    let (lo, hi) = dimension_range(dim);
    Ok((0..t)
        .map(|index| {
            let seed = derive_seed(master_seed, index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dimension = rng.gen_range(lo..=hi);
            let mut components = rand::seq::index::sample(&mut rng, dim, dimension).into_vec();
            components.sort_unstable();
            SubModelSpec {
                index,
                dimension,
                components,
                seed,
            }
        })
        .collect())
}

/// Restricts a normalized corpus to the spec's components.
pub fn project(corpus: &Corpus, spec: &SubModelSpec) -> Result<Corpus> {
    if !corpus.is_normalized() {
        return Err(Error::NotNormalized("projection"));
    }
    let mut sorted = spec.components.clone();
    sorted.dedup();
    if sorted.len() != spec.components.len() || sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Subspace(
            "components must be sorted and distinct".into(),
        ));
    }
    corpus.select_columns(&spec.components)
}

/// Averages reversed ranks `n + 1 − rank` over all rankings.
pub fn fuse_rankings(rankings: &[ActorRanking], n: usize) -> Result<ActorRanking> {
    if rankings.is_empty() {
        return Err(Error::Ranking("no rankings to fuse".into()));
    }
    let mut masses = vec![0u64; n];
    for (j, ranking) in rankings.iter().enumerate() {
        if ranking.len() != n {
            return Err(Error::Ranking(format!(
                "ranking {j} has {} actors, expected {n}",
                ranking.len()
            )));
        }
        let mut seen = vec![false; n];
        for (pos, entry) in ranking.entries().iter().enumerate() {
            let a = entry.actor.0;
            if a >= n || std::mem::replace(&mut seen[a], true) {
                return Err(Error::Ranking(format!(
                    "ranking {j} is not a permutation ({} repeated or out of range)",
                    entry.actor
                )));
            }
            masses[a] += (n - pos) as u64;
        }
    }
    Ok(ActorRanking::from_masses(masses, rankings.len() as u64))
}

pub fn detect_bagged(
    corpus: &Corpus,
    p: usize,
    kernel: KernelChoice,
    lof: LofParams,
    t: usize,
    master_seed: u64,
) -> Result<BaggedRanking> {
    if !corpus.is_normalized() {
        return Err(Error::NotNormalized("detection"));
    }
    let specs = sample_subspaces(corpus.dim(), t, master_seed)?;
    let submodels = specs
        .par_iter()
        .map(|spec| detect_single(&project(corpus, spec)?, p, kernel, lof))
        .collect::<Result<Vec<_>>>()?;
    let final_ranking = fuse_rankings(&submodels, corpus.n())?;
    Ok(BaggedRanking {
        final_ranking,
        submodels,
        specs,
    })
}
