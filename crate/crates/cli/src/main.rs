//! Command-line driver: training, evaluation, exact solving, benchmarks.
//!
//! Exit codes: 0 success, 1 validation/input error, 2 runtime/budget error.

mod commands;
mod config;
mod envs;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input files; exit code 1.
    Validation(String),
    /// Failures during execution (I/O, budgets); exit code 2.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "simmax",
    about = "Simultaneous-move zero-sum Markov game engine",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir` from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed (overrides `seed` from the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Self-play worker threads (overrides `workers`; 0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Dotted-path config overrides, e.g. --set train.n_iter=4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the self-play training loop.
    Train(CommonArgs),
    /// Evaluate a checkpoint's exploitability.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Checkpoint produced by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Solve a tabular game exactly by backward induction.
    Solve(CommonArgs),
    /// Measure search and solver throughput.
    Bench(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => with_run(&args, commands::train::run),
        Command::Eval { common, checkpoint } => {
            with_run(&common, |cfg, out| commands::eval::run(cfg, out, &checkpoint))
        }
        Command::Solve(args) => with_run(&args, commands::solve::run),
        Command::Bench(args) => with_run(&args, commands::bench::run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Loads and resolves the config, prepares the output directory, echoes the
/// resolved config for provenance, then hands off to the command.
fn with_run(
    args: &CommonArgs,
    run: impl FnOnce(&RunConfig, &Path) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config, &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.display().to_string();
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;

    let out_dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", out_dir.display())))?;
    std::fs::write(out_dir.join("config_resolved.toml"), cfg.to_toml())
        .map_err(|e| CliError::Runtime(format!("writing config echo: {e}")))?;

    run(&cfg, &out_dir)
}
