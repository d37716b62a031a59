use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

mod commands;

#[derive(Debug, Parser)]
#[command(name = "kpzlab", version, about = "ASEP, GUE, Tracy-Widom and topological recursion from the command line")]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config: an experiment config for run-experiment, otherwise an
    /// object with any of `seed`, `workers`, `out`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate ASEP trajectories and export heights or one-point samples.
    SimulateAsep(commands::SimulateAsep),
    /// Transition probability from the contour-integral formula.
    ExactProb(commands::ExactProb),
    /// Bethe roots and eigenpairs on a ring.
    Bethe(commands::Bethe),
    /// GUE spectra, empirical spectral distribution and edge samples.
    GueSpectrum(commands::GueSpectrum),
    /// Metropolis chain on the GUE eigenvalue density.
    CoulombMcmc(commands::CoulombMcmc),
    /// Monte Carlo trace moments against the exact Wick values.
    TraceMoments(commands::TraceMoments),
    /// Tracy-Widom F2 table and point values.
    TwCdf(commands::TwCdf),
    /// Topological recursion correlators and their expansions.
    Toprec(commands::Toprec),
    /// Run a named acceptance experiment.
    RunExperiment(RunExperiment),
}

#[derive(Debug, Args)]
struct RunExperiment {
    /// Experiment id; may instead come from --config.
    id: Option<String>,
    /// Parameter override `key=value`; the value is read as JSON when it parses.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

/// Global settings after merging the config file with command-line flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlobalFile {
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

pub enum Outcome {
    Pass,
    Fail,
}

fn schema(msg: String) -> anyhow::Error {
    kpzlab::Error::Schema(msg).into()
}

fn read_json(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|source| kpzlab::Error::Io { path: path.clone(), source })
        .with_context(|| format!("reading config {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut file = GlobalFile::default();
    let mut experiment = None;
    if let Some(path) = &cli.config {
        let text = read_json(path)?;
        if matches!(cli.command, Command::RunExperiment(_)) {
            let cfg = kpzlab::experiment::ExperimentConfig::from_json(&text)?;
            file.seed = Some(cfg.seed);
            file.workers = Some(cfg.workers);
            file.out = cfg.out.clone();
            experiment = Some(cfg);
        } else {
            file = serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?;
        }
    }
    let settings = Settings {
        seed: cli.seed.or(file.seed).unwrap_or(1),
        workers: cli.workers.or(file.workers).unwrap_or(1),
        out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
    };
    if settings.workers == 0 {
        return Err(schema("--workers must be at least 1".into()));
    }
    if let Command::RunExperiment(args) = cli.command {
        return commands::run_experiment(&settings, experiment, args.id, &args.params);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(settings.workers).build()?;
    pool.install(|| match cli.command {
        Command::SimulateAsep(a) => a.run(&settings),
        Command::ExactProb(a) => a.run(&settings),
        Command::Bethe(a) => a.run(&settings),
        Command::GueSpectrum(a) => a.run(&settings),
        Command::CoulombMcmc(a) => a.run(&settings),
        Command::TraceMoments(a) => a.run(&settings),
        Command::TwCdf(a) => a.run(&settings),
        Command::Toprec(a) => a.run(&settings),
        Command::RunExperiment(_) => unreachable!(),
    })
}

/// 2 for anything the caller got wrong, 1 for computations that ran and failed.
fn exit_code(err: &anyhow::Error) -> u8 {
    fn classify(e: &kpzlab::Error) -> u8 {
        use kpzlab::Error::*;
        match e {
            Context { source, .. } => classify(source),
            Schema(_) | InvalidParameter(_) | InvalidOrdering(_) | OutOfRange { .. } | WindowTooSmall { .. }
            | StateSpaceTooLarge { .. } | Io { .. } | Json(_) | Csv(_) | BaseCase { .. } => 2,
            _ => 1,
        }
    }
    err.chain()
        .find_map(|e| e.downcast_ref::<kpzlab::Error>())
        .map_or(2, classify)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
