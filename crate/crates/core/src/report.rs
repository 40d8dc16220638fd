//! Run configuration and the report documents emitted by the CLI.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::bagging::detect_bagged;
use crate::corpus::normalize;
use crate::detector::{detect_single, ActorRanking};
use crate::distance::KernelChoice;
use crate::error::{Error, Result};
use crate::harness::{run_experiment, DetectorParams, Method, Mode, SyntheticConfig, TrialResult};
use crate::io::FeatureTable;
use crate::lof::LofParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: usize,
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub kernel: KernelChoice,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 1,
            k: 10,
            t: 16,
            kernel: KernelChoice::Linear,
            seed: 0,
            mode: Mode::Single,
        }
    }
}

impl RunConfig {
    pub fn detector(&self) -> DetectorParams {
        DetectorParams {
            p: self.p,
            kernel: self.kernel,
            lof: LofParams { k: self.k },
            t: self.t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("--p must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("--k must be at least 1".into()));
        }
        if self.t == 0 {
            return Err(Error::Config("--T must be at least 1".into()));
        }
        if let KernelChoice::Gaussian { gamma: Some(g) } = self.kernel {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Config(format!("--gamma must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub actor_id: String,
    pub actor_index: usize,
    pub score: f64,
}

fn rank_rows(ranking: &ActorRanking, table: &FeatureTable) -> Vec<RankRow> {
    ranking
        .scores()
        .into_iter()
        .enumerate()
        .map(|(i, (actor, score))| RankRow {
            rank: i + 1,
            actor_id: table.actor_name(actor).to_string(),
            actor_index: actor.0,
            score,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodelSection {
    pub index: usize,
    pub dimension: usize,
    pub components: Vec<usize>,
    pub seed: u64,
    pub ranking: Vec<RankRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaggedSection {
    #[serde(rename = "final")]
    pub final_ranking: Vec<RankRow>,
    pub submodels: Vec<SubmodelSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputShape {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "H")]
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectReport {
    pub config: RunConfig,
    pub input: InputShape,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single: Option<Vec<RankRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bagged: Option<BaggedSection>,
}

/// Normalizes the loaded corpus and ranks its actors.
pub fn run_detect(table: &FeatureTable, config: &RunConfig) -> Result<DetectReport> {
    config.validate()?;
    let corpus = &table.corpus;
    if !corpus.m().is_multiple_of(config.p) || config.p > corpus.m() {
        return Err(Error::Partition {
            p: config.p,
            m: corpus.m(),
            reason: "p must divide m",
        });
    }
    let corpus = normalize(corpus)?;
    let lof = LofParams { k: config.k };
    let single = if config.mode.runs_single() {
        let ranking = detect_single(&corpus, config.p, config.kernel, lof)?;
        Some(rank_rows(&ranking, table))
    } else {
        None
    };
    let bagged = if config.mode.runs_bagged() {
        let result = detect_bagged(&corpus, config.p, config.kernel, lof, config.t, config.seed)?;
        Some(BaggedSection {
            final_ranking: rank_rows(&result.final_ranking, table),
            submodels: result
                .specs
                .iter()
                .zip(&result.submodels)
                .map(|(spec, ranking)| SubmodelSection {
                    index: spec.index,
                    dimension: spec.dimension,
                    components: spec.components.clone(),
                    seed: spec.seed,
                    ranking: rank_rows(ranking, table),
                })
                .collect(),
        })
    } else {
        None
    };
    Ok(DetectReport {
        config: *config,
        input: InputShape {
            n: corpus.n(),
            m: corpus.m(),
            dim: corpus.dim(),
        },
        single,
        bagged,
    })
}

/// Plain-text ranking table(s) for standard output.
pub fn render_detect(report: &DetectReport) -> String {
    let mut out = String::new();
    let mut section = |title: &str, rows: &[RankRow]| {
        let _ = writeln!(out, "# {title}");
        let _ = writeln!(out, "rank\tactor\tscore");
        for r in rows {
            let _ = writeln!(out, "{}\t{}\t{}", r.rank, r.actor_id, r.score);
        }
    };
    if let Some(rows) = &report.single {
        section("single", rows);
    }
    if let Some(b) = &report.bagged {
        section("bagged", &b.final_ranking);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "H")]
    pub dim: usize,
    pub deltas: Vec<f64>,
    pub rho: f64,
    pub noise_model: crate::harness::NoiseModel,
    pub trials: usize,
    #[serde(flatten)]
    pub run: RunConfig,
}

impl SimulateConfig {
    fn synthetic(&self, delta: f64) -> SyntheticConfig {
        SyntheticConfig {
            n: self.n,
            m: self.m,
            dim: self.dim,
            delta,
            rho: self.rho,
            noise_model: self.noise_model,
            trials: self.trials,
            master_seed: self.run.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTrial {
    pub delta: f64,
    #[serde(flatten)]
    pub result: TrialResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub delta: f64,
    pub method: Method,
    pub average_rank: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub config: SimulateConfig,
    pub trials: Vec<SweepTrial>,
    pub summary: Vec<CurveRow>,
    #[serde(skip)]
    pub elapsed: Vec<(f64, Duration)>,
}

/// Runs the trial protocol once per delta. Every delta reuses the same seed,
/// so sweeps share guilty-actor choices and noise draws across deltas.
pub fn run_simulation(config: &SimulateConfig) -> Result<SimulateReport> {
    config.run.validate()?;
    if config.deltas.is_empty() {
        return Err(Error::Config("at least one delta is required".into()));
    }
    let mut trials = Vec::new();
    let mut summary = Vec::new();
    let mut elapsed = Vec::new();
    for &delta in &config.deltas {
        let report = run_experiment(
            &config.synthetic(delta),
            &config.run.detector(),
            config.run.mode,
        )?;
        for method in [Method::Single, Method::Bagged] {
            if let Some(s) = report.summary.get(method) {
                summary.push(CurveRow {
                    delta,
                    method,
                    average_rank: s.average_rank,
                    stderr: s.stderr,
                });
            }
        }
        trials.extend(
            report
                .trials
                .into_iter()
                .map(|result| SweepTrial { delta, result }),
        );
        elapsed.push((delta, report.timing.total));
    }
    Ok(SimulateReport {
        config: config.clone(),
        trials,
        summary,
        elapsed,
    })
}

/// `delta,method,average_rank,stderr` with one row per (delta, method).
pub fn curves_csv(report: &SimulateReport) -> String {
    let mut out = String::from("delta,method,average_rank,stderr\n");
    for row in &report.summary {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.delta,
            row.method.name(),
            row.average_rank,
            row.stderr
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    fn sim(deltas: Vec<f64>, mode: Mode) -> SimulateConfig {
        SimulateConfig {
            n: 6,
            m: 4,
            dim: 5,
            deltas,
            rho: 1.0,
            noise_model: Default::default(),
            trials: 3,
            run: RunConfig {
                k: 3,
                t: 3,
                mode,
                seed: 5,
                ..Default::default()
            },
        }
    }

    #[test]
    fn sweep_has_one_row_per_delta_and_method() {
        let report = run_simulation(&sim(vec![0.0, 0.5, 1.0, 2.0], Mode::Compare)).unwrap();
        let csv = curves_csv(&report);
        assert_eq!(csv.lines().count(), 1 + 8);
        assert_eq!(report.trials.len(), 12);
        let single_only = run_simulation(&sim(vec![0.0, 1.0], Mode::Single)).unwrap();
        assert_eq!(curves_csv(&single_only).lines().count(), 3);
    }

    #[test]
    fn report_json_has_stable_top_level_keys() {
        let report = run_simulation(&sim(vec![1.0], Mode::Compare)).unwrap();
        let value = serde_json::to_value(&report).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["config", "summary", "trials"]);
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.starts_with("{\"config\":{\"n\":6,\"m\":4,\"H\":5,"));
        assert!(text.contains("\"T\":3"));
    }

    #[test]
    fn detect_rejects_indivisible_p() {
        let table = FeatureTable::from_corpus(Corpus::new(3, 5, 2, vec![0.5; 30]).unwrap());
        let config = RunConfig {
            p: 2,
            ..Default::default()
        };
        let err = run_detect(&table, &config).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p=2") && msg.contains("m=5"), "{msg}");
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig {
            t: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            kernel: KernelChoice::Gaussian { gamma: Some(-1.0) },
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(run_simulation(&sim(vec![], Mode::Single)).is_err());
    }
}
