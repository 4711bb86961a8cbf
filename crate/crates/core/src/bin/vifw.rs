use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vifw::config::{ExperimentConfig, Mode};
use vifw::harness::{self, RunContext};
use vifw::Error;

#[derive(Parser)]
#[command(name = "vifw", version, about = "Frank-Wolfe experiments for monotone variational inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the config in its own mode.
    Run(Target),
    /// Compute and cache the reference solution.
    Oracle(Target),
    /// Run every schedule listed in the config on one instance.
    Compare(Target),
}

#[derive(Args)]
struct Target {
    config: PathBuf,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(target: &Target, mode: Option<Mode>) -> Result<serde_json::Value, Error> {
    let mut cfg = ExperimentConfig::load(&target.config)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(n) = target.max_iter {
        cfg.max_iter = n;
    }
    if let Some(t) = target.gap_tol {
        cfg.gap_tol = t;
    }
    if let Some(s) = target.seed {
        cfg.seed = s;
    }
    let report = harness::run(&cfg, &RunContext::from_env())?;
    Ok(report.summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (target, mode) = match &cli.command {
        Command::Run(t) => (t, None),
        Command::Oracle(t) => (t, Some(Mode::Oracle)),
        Command::Compare(t) => (t, Some(Mode::Compare)),
    };
    match execute(target, mode) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e @ (Error::Config { .. } | Error::Json(_))) => {
            eprintln!("vifw: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("vifw: {e}");
            ExitCode::from(1)
        }
    }
}
