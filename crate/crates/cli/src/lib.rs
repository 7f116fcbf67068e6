//! Command line front end: configuration loading, command dispatch and
//! result serialization.
//!
//! Exit codes: 0 success, 1 error (or failed verification), 2 iteration
//! limit reached, 3 monotone chain broken, 4 oracle found multiple roots.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use nide_core::{GridError, LinearError, MonotoneError, OracleError};

pub use config::{load_config, parse_config, ConfigIssue, ProblemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_BREACH: i32 = 3;
pub const EXIT_MULTIPLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config:{}", .0.iter().map(|i| format!("\n  {i}")).collect::<String>())]
    Config(Vec<ConfigIssue>),
    #[error("{0}")]
    Usage(String),
    #[error("cannot evaluate {0}")]
    Evaluation(String),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "nide", version, about = "Monotone iterative solver for impulsive difference equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Problem configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the monotone iteration from alpha0 and beta0.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        residual_tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Check alpha0, beta0 and the one-sided bounds.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the nonlinear problem directly by root finding.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the "linear" section by recursion and by the explicit formula.
    Linear {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Runs one command; `stdout` receives data (when no `--out` is given) and
/// the summary, `stderr` receives diagnostics.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve {
            common,
            tol,
            residual_tol,
            max_iter,
        } => {
            let mut config = load_config(&common.config)?;
            if let Some(tol) = tol {
                config.solver.tol = tol;
            }
            if let Some(tol) = residual_tol {
                config.solver.residual_tol = tol;
            }
            if let Some(max_iter) = max_iter {
                config.solver.max_iter = max_iter;
            }
            commands::cmd_solve(&config, common.out.as_deref(), common.format, stdout, stderr)
        }
        Command::Verify { config } => {
            let config = load_config(&config)?;
            commands::cmd_verify(&config, stdout)
        }
        Command::Oracle { common } => {
            let config = load_config(&common.config)?;
            commands::cmd_oracle(&config, common.out.as_deref(), common.format, stdout, stderr)
        }
        Command::Linear { common } => {
            let config = load_config(&common.config)?;
            commands::cmd_linear(&config, common.out.as_deref(), common.format, stdout, stderr)
        }
    }
}
