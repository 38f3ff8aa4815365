//! Reproducible parallel Monte Carlo over trajectories.
//!
//! The pieces: validated experiment configurations, the trajectory ensemble
//! runner (mean squared norms, averaged density matrices, effective sample
//! sizes), the conditional branching test for the norm-martingale property,
//! weak-convergence studies for the integrators, a comparison against the
//! constant-rate master-equation solution, and a check that two noise pairs
//! sharing the Hermitian correlation produce the same reduced state.
//!
//! Determinism contract: every result is bit-identical for a fixed master
//! seed regardless of worker count or scheduling. Trajectories are assigned
//! to fixed-size blocks by index, each block folds sequentially into its own
//! accumulator, and blocks are merged along a fixed pairwise binary tree.

mod branching;
mod compare;
mod config;
mod convergence;
mod eta;
mod run;

pub use branching::{
    binomial_two_sided_p_value, martingale_branch_test, BranchingReport, CheckpointStat,
    PrefixRecord, EXCEED_NULL_PROBABILITY, MIN_BINOMIAL_P, Z_THRESHOLD,
};
pub use compare::{compare_to_gksl, GkslComparison, GkslVerdict};
pub use config::{
    BranchingParams, ConfigError, ExperimentConfig, DEFAULT_CHECKPOINT_OFFSETS, MIN_CONTINUATIONS,
};
pub use convergence::{
    convergence_study, ConvergenceReport, ConvergenceRow, EM_ORDER_WINDOW, EXACT_CONSISTENCY_Z_MAX,
    HEUN_ORDER_WINDOW,
};
pub use eta::{eta_independence_check, EtaReport};
pub use run::{
    effective_workers, run_ensemble, run_ensemble_with_residual, EnsembleStats, MAX_ABORT_FRACTION,
    WORKERS_ENV,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::noise::NoiseError;
use crate::oracles::OracleError;
use crate::sse::SseError;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("configuration rejected: {0}")]
    Config(#[from] ConfigError),
    #[error(
        "{aborted} of {total} trajectories aborted on norm overflow \
         (more than the permitted 1%)"
    )]
    TooManyAborts { aborted: usize, total: usize },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Sse(#[from] SseError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
