use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use featbag::distance::KernelChoice;
use featbag::harness::{Mode, NoiseModel};
use featbag::io::load_features;
use featbag::report::{
    curves_csv, render_detect, run_detect, run_simulation, RunConfig, SimulateConfig,
};
use featbag::{Error, Result};

#[derive(Parser)]
#[command(
    name = "featbag",
    version,
    about = "Rank actors by steganographer suspicion"
)]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the actors of a feature CSV file.
    Detect(DetectArgs),
    /// Run the synthetic average-rank experiment.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Bagged,
    Compare,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Bagged => Mode::Bagged,
            ModeArg::Compare => Mode::Compare,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Gaussian,
}

#[derive(Args)]
struct RunArgs {
    /// Points per actor; must divide m.
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// LOF neighborhood size.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Number of bagged sub-models.
    #[arg(long = "T", default_value_t = 16)]
    t: usize,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelArg,
    /// Gaussian bandwidth; defaults to 1/H' per sub-model.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn config(&self, mode: ModeArg) -> Result<RunConfig> {
        let kernel = match (self.kernel, self.gamma) {
            (KernelArg::Linear, Some(_)) => {
                return Err(Error::Config("--gamma requires --kernel gaussian".into()))
            }
            (KernelArg::Linear, None) => KernelChoice::Linear,
            (KernelArg::Gaussian, gamma) => KernelChoice::Gaussian { gamma },
        };
        let config = RunConfig {
            p: self.p,
            k: self.k,
            t: self.t,
            kernel,
            seed: self.seed,
            mode: mode.into(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum, default_value = "single")]
    mode: ModeArg,
    #[command(flatten)]
    run: RunArgs,
    /// Directory for ranking.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long = "H", default_value_t = 274)]
    dim: usize,
    /// Guilty mean shift.
    #[arg(long, conflicts_with = "delta_sweep")]
    delta: Option<f64>,
    /// Comma-separated list of shifts, one experiment each.
    #[arg(long, value_delimiter = ',')]
    delta_sweep: Option<Vec<f64>>,
    /// Fraction of components carrying the shift.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value = "compare")]
    mode: ModeArg,
    #[command(flatten)]
    run: RunArgs,
    /// Directory for report.json and curves.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn detect(args: DetectArgs) -> Result<()> {
    let config = args.run.config(args.mode)?;
    let table = load_features(&args.features)?;
    let report = run_detect(&table, &config)?;
    print!("{}", render_detect(&report));
    if let Some(dir) = &args.out {
        write_json(dir, "ranking.json", &report)?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let run = args.run.config(args.mode)?;
    let deltas = match (args.delta, args.delta_sweep) {
        (_, Some(sweep)) => sweep,
        (Some(d), None) => vec![d],
        (None, None) => vec![0.0],
    };
    if let Some(bad) = deltas.iter().find(|d| !d.is_finite()) {
        return Err(Error::Config(format!("delta must be finite, got {bad}")));
    }
    if !args.m.is_multiple_of(run.p) {
        return Err(Error::Partition {
            p: run.p,
            m: args.m,
            reason: "p must divide m",
        });
    }
    let config = SimulateConfig {
        n: args.n,
        m: args.m,
        dim: args.dim,
        deltas,
        rho: args.rho,
        noise_model: NoiseModel::IidGaussian,
        trials: args.trials,
        run,
    };
    let report = run_simulation(&config)?;
    write_json(&args.out, "report.json", &report)?;
    let csv = curves_csv(&report);
    fs::write(args.out.join("curves.csv"), &csv)?;
    print!("{csv}");
    for (delta, elapsed) in &report.elapsed {
        eprintln!("delta {delta}: {:.2}s", elapsed.as_secs_f64());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let command = cli.command;
    let go = move || match command {
        Command::Detect(args) => detect(args),
        Command::Simulate(args) => simulate(args),
    };
    match cli.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?
            .install(go),
        None => go(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
