//! `degenlab`: inequality campaigns, solves, seminorms and ε-sweeps driven
//! by TOML configuration files.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use degenlab_core::experiments::SweepKind;

use commands::{CliResult, Run};
use config::{parse_config, parse_config_str, Needs};
use error::{CliError, EXIT_CODES};

#[derive(Debug, Parser)]
#[command(name = "degenlab", version, about, after_help = EXIT_CODES)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the configuration (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Campaign seed; overrides `[campaign].seed`.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Randomized check of the pointwise vector-field inequalities.
    CheckInequalities,
    /// Solve a catalog problem and write the trajectory.
    Solve,
    /// Evaluate one estimator on a stored or exact trajectory.
    Seminorm,
    /// Run an ε-sweep.
    Sweep {
        #[arg(value_enum)]
        kind: SweepArg,
    },
    /// Summarize the manifests in the output directory.
    Report,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepArg {
    Energy,
    Comparison,
    Sobolev,
    TimeDerivative,
    Fractional,
}

impl From<SweepArg> for SweepKind {
    fn from(a: SweepArg) -> Self {
        match a {
            SweepArg::Energy => SweepKind::Energy,
            SweepArg::Comparison => SweepKind::Comparison,
            SweepArg::Sobolev => SweepKind::Sobolev,
            SweepArg::TimeDerivative => SweepKind::TimeDerivative,
            SweepArg::Fractional => SweepKind::Fractional,
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let needs = match cli.command {
        Command::CheckInequalities => Needs::Campaign,
        Command::Solve => Needs::Solve,
        Command::Seminorm => Needs::Seminorm,
        Command::Sweep { .. } => Needs::Sweep,
        Command::Report => Needs::Report,
    };
    let mut config = match &cli.config {
        Some(path) => parse_config(path, needs)?,
        None => parse_config_str("", needs)?,
    };
    if let Some(seed) = cli.seed {
        config.campaign.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let run = Run {
        config,
        out,
        seed: cli.seed,
    };
    match cli.command {
        Command::CheckInequalities => commands::check_inequalities(&run),
        Command::Solve => commands::solve(&run),
        Command::Seminorm => commands::seminorm(&run),
        Command::Sweep { kind } => commands::sweep(&run, kind.into()),
        Command::Report => commands::report(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.summary());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
