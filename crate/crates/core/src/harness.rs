//! Synthetic trial generator and the repeated-trial evaluation protocol:
//! one randomly chosen guilty actor per trial, scored by its 1-based rank in
//! the final actor ranking, averaged over trials.
//!
//! Innocent actors draw every component i.i.d. from N(0, 1). The guilty actor
//! draws from N(δ, 1) on a per-trial random subset of `⌈ρH⌉` components and
//! from N(0, 1) elsewhere.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bagging::detect_bagged;
use crate::corpus::{normalize, ActorId, Corpus};
use crate::detector::detect_single;
use crate::distance::KernelChoice;
use crate::error::{Error, Result};
use crate::lof::LofParams;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum NoiseModel {
    #[default]
    #[serde(rename = "iid-gaussian")]
    IidGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "H")]
    pub dim: usize,
    pub delta: f64,
    pub rho: f64,
    pub noise_model: NoiseModel,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 50,
            m: 100,
            dim: 274,
            delta: 0.0,
            rho: 1.0,
            noise_model: NoiseModel::IidGaussian,
            trials: 100,
            master_seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return fail(format!("n must be at least 2, got {}", self.n));
        }
        if self.m < 1 {
            return fail("m must be at least 1".into());
        }
        if self.dim < 2 {
            return fail(format!("H must be at least 2, got {}", self.dim));
        }
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return fail(format!("rho must lie in (0, 1], got {}", self.rho));
        }
        if !self.delta.is_finite() {
            return fail(format!("delta must be finite, got {}", self.delta));
        }
        Ok(())
    }

    /// Number of components carrying the guilty shift.
    pub fn informative_components(&self) -> usize {
        ((self.rho * self.dim as f64).ceil() as usize).clamp(1, self.dim)
    }
}

/// Detector settings shared by every trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorParams {
    pub p: usize,
    pub kernel: KernelChoice,
    pub lof: LofParams,
    #[serde(rename = "T")]
    pub t: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            p: 1,
            kernel: KernelChoice::Linear,
            lof: LofParams::default(),
            t: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Bagged,
    Compare,
}

impl Mode {
    pub fn runs_single(self) -> bool {
        matches!(self, Mode::Single | Mode::Compare)
    }

    pub fn runs_bagged(self) -> bool {
        matches!(self, Mode::Bagged | Mode::Compare)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Single,
    Bagged,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Bagged => "bagged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub guilty: ActorId,
    pub single_rank: Option<usize>,
    pub bagged_rank: Option<usize>,
}

impl TrialResult {
    pub fn rank(&self, method: Method) -> Option<usize> {
        match method {
            Method::Single => self.single_rank,
            Method::Bagged => self.bagged_rank,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodSummary {
    pub average_rank: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub single: Option<MethodSummary>,
    pub bagged: Option<MethodSummary>,
}

impl Summary {
    pub fn get(&self, method: Method) -> Option<MethodSummary> {
        match method {
            Method::Single => self.single,
            Method::Bagged => self.bagged,
        }
    }
}

/// Wall-clock measurements. Kept out of serialized reports so that reports
/// are reproducible byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timing {
    pub total: Duration,
    pub single: Duration,
    pub bagged: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: SyntheticConfig,
    pub params: DetectorParams,
    pub mode: Mode,
    pub trials: Vec<TrialResult>,
    pub summary: Summary,
    #[serde(skip)]
    pub timing: Timing,
}

/// Seeds for trial `trial`: (data generator, bagging master seed).
fn trial_seeds(master: u64, trial: usize) -> (u64, u64) {
    let base = derive_seed(master, trial as u64);
    (derive_seed(base, 0), derive_seed(base, 1))
}

/// Draws one raw (unnormalized) corpus and its guilty actor.
pub fn generate_trial(config: &SyntheticConfig, trial: usize) -> Result<(Corpus, ActorId)> {
    config.validate()?;
    let (data_seed, _) = trial_seeds(config.master_seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
    let guilty = rng.gen_range(0..config.n);

    let mut shift = vec![0.0; config.dim];
    for c in rand::seq::index::sample(&mut rng, config.dim, config.informative_components()) {
        shift[c] = config.delta;
    }

    let mut data = Vec::with_capacity(config.n * config.m * config.dim);
    for a in 0..config.n {
        for _ in 0..config.m {
            for &s in &shift {
                let z: f64 = rng.sample(StandardNormal);
                data.push(if a == guilty { z + s } else { z });
            }
        }
    }
    let corpus = Corpus::new(config.n, config.m, config.dim, data)?;
    Ok((corpus, ActorId(guilty)))
}

fn run_trial(
    config: &SyntheticConfig,
    params: &DetectorParams,
    mode: Mode,
    trial: usize,
) -> Result<(TrialResult, Duration, Duration)> {
    let (raw, guilty) = generate_trial(config, trial)?;
    let corpus = normalize(&raw)?;
    let (_, bag_seed) = trial_seeds(config.master_seed, trial);

    let mut single_time = Duration::ZERO;
    let single_rank = if mode.runs_single() {
        let start = Instant::now();
        let ranking = detect_single(&corpus, params.p, params.kernel, params.lof)?;
        single_time = start.elapsed();
        ranking.rank_of(guilty)
    } else {
        None
    };

    let mut bagged_time = Duration::ZERO;
    let bagged_rank = if mode.runs_bagged() {
        let start = Instant::now();
        let bagged = detect_bagged(
            &corpus,
            params.p,
            params.kernel,
            params.lof,
            params.t,
            bag_seed,
        )?;
        bagged_time = start.elapsed();
        bagged.final_ranking.rank_of(guilty)
    } else {
        None
    };

    Ok((
        TrialResult {
            trial,
            guilty,
            single_rank,
            bagged_rank,
        },
        single_time,
        bagged_time,
    ))
}

/// Runs `config.trials` independent trials; both methods see the same corpus
/// in a trial. Trials run in parallel and are reported in trial order.
pub fn run_experiment(
    config: &SyntheticConfig,
    params: &DetectorParams,
    mode: Mode,
) -> Result<ExperimentReport> {
    config.validate()?;
    if params.p == 0 || !config.m.is_multiple_of(params.p) {
        return Err(Error::Partition {
            p: params.p,
            m: config.m,
            reason: "p must divide m",
        });
    }
    let start = Instant::now();
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, params, mode, trial))
        .collect::<Result<Vec<_>>>()?;

    let mut timing = Timing::default();
    let mut trials = Vec::with_capacity(outcomes.len());
    for (result, single, bagged) in outcomes {
        timing.single += single;
        timing.bagged += bagged;
        trials.push(result);
    }
    timing.total = start.elapsed();

    let summarize = |method: Method| -> Result<MethodSummary> {
        Ok(MethodSummary {
            average_rank: average_rank(&trials, method)?,
            stderr: standard_error(&trials, method)?,
        })
    };
    let summary = Summary {
        single: mode
            .runs_single()
            .then(|| summarize(Method::Single))
            .transpose()?,
        bagged: mode
            .runs_bagged()
            .then(|| summarize(Method::Bagged))
            .transpose()?,
    };

    Ok(ExperimentReport {
        config: config.clone(),
        params: *params,
        mode,
        trials,
        summary,
        timing,
    })
}

fn collect_ranks(results: &[TrialResult], method: Method) -> Result<Vec<f64>> {
    if results.is_empty() {
        return Err(Error::Config("no trial results".into()));
    }
    results
        .iter()
        .map(|r| {
            r.rank(method)
                .map(|v| v as f64)
                .ok_or(Error::MissingRank(method.name(), r.trial))
        })
        .collect()
}

/// Arithmetic mean of the chosen method's guilty-actor ranks.
pub fn average_rank(results: &[TrialResult], method: Method) -> Result<f64> {
    let ranks = collect_ranks(results, method)?;
    Ok(ranks.iter().sum::<f64>() / ranks.len() as f64)
}

/// Standard error of the mean rank (sample standard deviation over √trials);
/// zero for a single trial.
pub fn standard_error(results: &[TrialResult], method: Method) -> Result<f64> {
    let ranks = collect_ranks(results, method)?;
    let count = ranks.len() as f64;
    if ranks.len() < 2 {
        return Ok(0.0);
    }
    let mean = ranks.iter().sum::<f64>() / count;
    let var = ranks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok((var / count).sqrt())
}
