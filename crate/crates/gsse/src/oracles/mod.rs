//! Independent reference solutions for validating ensemble output.
//!
//! Nothing in this module touches the trajectory integrators or their
//! discretization: every quantity is computed either in closed form from
//! kernel parameters or through a matrix exponential of a superoperator.
//! That independence is what makes these usable as oracles — agreement
//! between an ensemble estimate and a function here is evidence about the
//! simulator, not a tautology.

pub mod dephasing;
pub mod gksl;
pub mod master_residual;

pub use dephasing::{
    dephasing_conditional_norm_oracle, dephasing_decoherence_factor, gauss_hermite,
    DephasingPrefix,
};
pub use gksl::{gksl_solve, liouvillian, GkslSpec, GKSL_MAX_DIM};
pub use master_residual::{
    EntryResidual, MasterResidualAccumulator, MasterResidualReport, MIN_POINTS_PER_UNIT_TIME,
};

use crate::linalg::LinalgError;
use thiserror::Error;

/// Errors from the reference-solution layer.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("Hilbert dimension {dim} exceeds the reference-solver cap {cap}")]
    DimTooLarge { dim: usize, cap: usize },
    #[error("invalid reference specification: {reason}")]
    BadSpec { reason: String },
    #[error("invalid output times: {reason}")]
    BadTimes { reason: String },
    #[error("pair shape not supported by this oracle: {reason}")]
    UnsupportedPair { reason: String },
    #[error(
        "snapshot spacing {dt:.4e} too coarse for finite differences \
         (need at least {min_per_unit} points per unit time)"
    )]
    StrideTooCoarse { dt: f64, min_per_unit: f64 },
    #[error("solution trace drifted by {drift:.3e} at t = {t}")]
    TraceNotPreserved { t: f64, drift: f64 },
    #[error("not enough accumulated trajectories ({n}) to form error bars")]
    EmptyEnsemble { n: u64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
