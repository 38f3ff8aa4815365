//! Command-line surface of the `gsse` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "gsse",
    version,
    about = "Monte Carlo trajectory experiments for Gaussian colored-noise \
             stochastic Schrodinger equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a trajectory ensemble and write snapshot statistics.
    Simulate(CommonArgs),
    /// Branch continuations at an intermediate time and test whether the
    /// squared norm behaves as a martingale.
    MartingaleTest(CommonArgs),
    /// Sample noise realizations and test them against the configured
    /// correlations.
    ValidateNoise(CommonArgs),
    /// Compare the ensemble average against the constant-rate master
    /// equation.
    CompareGksl(CommonArgs),
    /// Measure the weak order of the configured integrator across step
    /// sizes.
    Convergence(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory for the artifacts (created if missing).
    #[arg(long)]
    pub out: PathBuf,

    /// Override the master seed from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads; overrides both the configuration and GSSE_WORKERS.
    #[arg(long)]
    pub workers: Option<usize>,
}
