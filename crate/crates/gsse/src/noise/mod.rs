//! Colored- and white-noise engine: correlation kernels, grid handling,
//! exact samplers, and conditional continuation for branching experiments.

pub mod grid;
pub mod kernel;
pub mod sample;
pub mod stats;

pub use grid::{GridError, TimeGrid};
pub use kernel::{
    validate_pair, white_weight, Component, CorrelationPair, Kernel, PairValidation,
    WhichCorrelation,
};
pub use sample::{
    condition_continue, continue_ou_exact, sample_general_cholesky, sample_ou_exact,
    sample_realization,
    sample_white_increments, NoiseError, NoiseRealization, DENSE_POINT_CAP,
};
pub use stats::{
    validate_noise_statistics, CorrelationCheck, NoiseValidationReport, DEFAULT_N_LAGS,
    NOISE_Z_LIMIT,
};
