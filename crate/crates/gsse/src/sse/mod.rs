//! Single-trajectory propagation: models, steppers, the exact diagonal
//! propagator, and the matrix-valued flow.

pub mod dephasing;
pub mod integrate;
pub mod model;
pub mod propagator;

pub use dephasing::{propagate_dephasing_exact, DephasingCtx};
pub use integrate::{
    propagate_segment, run_trajectory, EmCtx, Engine, HeunCtx, IntegratorKind, Scratch, SseError,
    TrajectoryResult, OVERFLOW_NORM_SQ,
};
pub use model::{ModelError, ModelKind, ModelSpec};
pub use propagator::{propagate_propagator, two_time_map};
