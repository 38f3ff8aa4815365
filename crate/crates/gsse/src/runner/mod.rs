//! Batch front end: JSON configurations in, CSV/JSON artifacts out.
//!
//! Each subcommand reads one configuration file, runs its experiment, and
//! fills an output directory with deterministic tables plus a single
//! `manifest.json` recording the configuration hash, effective seed and
//! worker count, wall time, and verdicts. Exit codes are part of the
//! contract: 0 for success (including an expected verdict), 2 for any
//! validation failure, 3 when a verdict contradicts the configured
//! expectation, 4 when too many trajectories abort.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;

pub use cli::{Cli, Command, CommonArgs};
pub use commands::{execute, QBM_OCCUPATION_WARN};
pub use config::{
    EnsembleSection, ExperimentSection, GridSection, ModelConfig, NoiseSection, RunConfig,
};
pub use output::ARTIFACT_VERSION;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    /// A configuration or input failed validation; the message names the
    /// violated requirement.
    #[error("{0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("ensemble aborted {aborted} of {total} trajectories")]
    TooManyAborts { aborted: usize, total: usize },
    #[error("verdict \"{actual}\" does not match expected \"{expected}\"")]
    VerdictMismatch { expected: String, actual: String },
}

/// Exit code for a run that failed validation (also used for i/o trouble).
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for a verdict that contradicts `experiment.expected_verdict`.
pub const EXIT_VERDICT_MISMATCH: i32 = 3;
/// Exit code for an ensemble that lost more than the tolerated fraction of
/// trajectories to numerical overflow.
pub const EXIT_TOO_MANY_ABORTS: i32 = 4;

impl RunnerError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Validation(_) | RunnerError::Io(_) => EXIT_VALIDATION,
            RunnerError::VerdictMismatch { .. } => EXIT_VERDICT_MISMATCH,
            RunnerError::TooManyAborts { .. } => EXIT_TOO_MANY_ABORTS,
        }
    }
}

/// Parse the process arguments, run the requested subcommand, and return the
/// process exit code.
pub fn main_entry() -> i32 {
    use clap::Parser;
    let cli = Cli::parse();
    match commands::execute(&cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
