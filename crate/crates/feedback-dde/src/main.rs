//! Thin command-line front end over [`feedback_dde::cli`].

use clap::{Parser, Subcommand};
use feedback_dde::cli::{self, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "feedback-dde",
    about = "A-priori bounds, sign certificates, and periodic-orbit search \
             for cyclic feedback delay systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Homotopy parameter λ (overrides the config).
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Convergence tolerance (overrides the config).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Integration step (overrides the config).
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Return-map iteration cap (overrides the config).
    #[arg(long = "max-periods", global = true)]
    max_periods: Option<usize>,

    /// Sampling seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural hypotheses on sampled grids.
    Validate,
    /// Compute the a-priori solution box.
    Bounds,
    /// Certify the face-sign pattern, homotopy, and degree.
    Certify,
    /// Integrate the system over a time horizon.
    Simulate,
    /// Locate the periodic orbit by return-map iteration.
    FindPeriodic,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, String> {
    let Some(path) = &cli.config else {
        return Err("--config PATH is required".into());
    };
    let mut config = RunConfig::from_file(path)?;
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(lambda) = cli.lambda {
        config.lambda = lambda;
    }
    if let Some(tol) = cli.tol {
        config.tol = tol;
    }
    if let Some(step) = cli.step {
        config.step = Some(step);
    }
    if let Some(max_periods) = cli.max_periods {
        config.max_periods = max_periods;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match effective_config(&cli) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(cli::EXIT_VALIDATION as u8);
        }
    };
    let code = match cli.command {
        Command::Validate => cli::cmd_validate(&config),
        Command::Bounds => cli::cmd_bounds(&config),
        Command::Certify => cli::cmd_certify(&config),
        Command::Simulate => cli::cmd_simulate(&config),
        Command::FindPeriodic => cli::cmd_find_periodic(&config),
    };
    ExitCode::from(code as u8)
}
