//! JSON run-configuration schema and its conversion into a validated
//! experiment.
//!
//! The file has five sections: `model` (a preset or explicit matrices),
//! `noise` (kernel lists for both components), `grid`, `ensemble`, and an
//! optional `experiment` section holding the knobs that only some
//! subcommands consume. Unknown fields are rejected so typos surface as
//! validation errors instead of silently running a different experiment.

use serde::{Deserialize, Serialize};

use crate::ensemble::{BranchingParams, ExperimentConfig};
use crate::linalg::{C64, ComplexMatrix, StateVector};
use crate::noise::{CorrelationPair, Kernel, TimeGrid};
use crate::sse::{IntegratorKind, ModelError, ModelSpec};

use super::RunnerError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `H = (omega/2) sigma_z`, `L = g sigma_x`, plus-state start.
    SpinBoson { omega: f64, g: f64 },
    /// `H = (omega/2) sigma_z`, `L = g sigma_z`, plus-state start.
    Dephasing { omega: f64, g: f64 },
    /// Truncated harmonic oscillator coupled through position.
    Qbm { omega: f64, dim: usize },
    /// Explicit matrices; complex entries are `[re, im]` pairs, row-major.
    Custom { h: Vec<Vec<[f64; 2]>>, l: Vec<Vec<[f64; 2]>>, psi0: Vec<[f64; 2]> },
}

fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> ComplexMatrix {
    let converted: Vec<Vec<C64>> = rows
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&converted)
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        match self {
            ModelConfig::SpinBoson { omega, g } => ModelSpec::spin_boson(*omega, *g),
            ModelConfig::Dephasing { omega, g } => ModelSpec::dephasing(*omega, *g),
            ModelConfig::Qbm { omega, dim } => ModelSpec::qbm(*omega, *dim),
            ModelConfig::Custom { h, l, psi0 } => ModelSpec::custom(
                matrix_from_pairs(h),
                matrix_from_pairs(l),
                StateVector::new(psi0.iter().map(|&[re, im]| C64::new(re, im)).collect()),
            ),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub x: Vec<Kernel>,
    pub y: Vec<Kernel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_max: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub integrator: IntegratorKind,
    pub n_snapshots: usize,
    /// Worker threads; absent means `GSSE_WORKERS` or machine parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
}

/// Knobs consumed only by specific subcommands; every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Branch point and shape for the martingale test.
    pub branching: Option<BranchingParams>,
    /// Constant decoherence rate for the master-equation comparison;
    /// absent means the white flux of the Hermitian correlation.
    pub gksl_rate: Option<f64>,
    /// Step-size ladder for the convergence study.
    pub dt_levels: Option<Vec<f64>>,
    /// Trajectories per level in the convergence study.
    pub n_per_level: Option<usize>,
    /// Realizations for the noise-statistics validation.
    pub n_noise_realizations: Option<usize>,
    /// When set, the subcommand's verdict must equal this string
    /// ("pass"/"fail", or "match"/"differ"/"inconclusive"); a different
    /// verdict exits with the mismatch code.
    pub expected_verdict: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub noise: NoiseSection,
    pub grid: GridSection,
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl RunConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, RunnerError> {
        serde_json::from_slice(bytes)
            .map_err(|e| RunnerError::Validation(format!("config file: {e}")))
    }

    /// Build the validated experiment, honoring command-line overrides.
    pub fn experiment_config(
        &self,
        seed_override: Option<u64>,
        workers_override: Option<usize>,
    ) -> Result<ExperimentConfig, RunnerError> {
        let model = self.model.build().map_err(|e| RunnerError::Validation(e.to_string()))?;
        let grid = TimeGrid::new(self.grid.t_max, self.grid.dt)
            .map_err(|e| RunnerError::Validation(e.to_string()))?;
        let cfg = ExperimentConfig {
            model,
            pair: CorrelationPair::new(self.noise.x.clone(), self.noise.y.clone()),
            grid,
            n_trajectories: self.ensemble.n_trajectories,
            master_seed: seed_override.unwrap_or(self.ensemble.master_seed),
            integrator: self.ensemble.integrator,
            n_snapshots: self.ensemble.n_snapshots,
            branching: self.experiment.branching.clone(),
            workers: workers_override.or(self.ensemble.workers),
        };
        cfg.validate().map_err(|e| RunnerError::Validation(e.to_string()))?;
        Ok(cfg)
    }
}
