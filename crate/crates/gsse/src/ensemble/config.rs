//! Experiment configuration and up-front validation.
//!
//! Everything that can be rejected before any sampling happens is rejected
//! here, with messages that name the violated invariant, so downstream code
//! can assume a well-formed experiment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{validate_pair, CorrelationPair, GridError, TimeGrid};
use crate::sse::{Engine, IntegratorKind, ModelSpec, SseError};

/// Fewest conditional continuations per prefix for the branching test; below
/// this the per-prefix standard errors are too noisy for a z-score verdict.
pub const MIN_CONTINUATIONS: usize = 100;

/// Default checkpoint times, as offsets added to the branch time: one probe
/// inside a correlation time of the reference colored component (unit rate)
/// and two beyond it.
pub const DEFAULT_CHECKPOINT_OFFSETS: [f64; 3] = [0.1, 0.5, 1.0];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("n_trajectories must be at least 2 (got {0}); standard errors need two samples")]
    TooFewTrajectories(usize),
    #[error("n_snapshots ({n_snapshots}) must be at least 1 and divide the step count ({n_steps})")]
    SnapshotsDoNotDivide { n_snapshots: usize, n_steps: usize },
    #[error("correlation pair rejected: {reasons}")]
    PairRejected { reasons: String },
    #[error("integrator incompatible with this configuration: {0}")]
    Integrator(#[from] SseError),
    #[error("branch time s = {s} must lie strictly inside (0, t_max = {t_max})")]
    BranchTimeOutsideHorizon { s: f64, t_max: f64 },
    #[error("time {t} is not a grid point: {source}")]
    OffGrid { t: f64, source: GridError },
    #[error("checkpoint time s + {offset} = {t} exceeds the horizon t_max = {t_max}")]
    CheckpointBeyondHorizon { offset: f64, t: f64, t_max: f64 },
    #[error("branching needs at least {MIN_CONTINUATIONS} continuations per prefix, got {0}")]
    TooFewContinuations(usize),
    #[error("branching needs at least 2 prefixes, got {0}")]
    TooFewPrefixes(usize),
    #[error("checkpoint offsets must be positive, strictly increasing, and nonempty; got {0:?}")]
    BadCheckpointOffsets(Vec<f64>),
    #[error("worker count must be positive when given")]
    ZeroWorkers,
    #[error("branching parameters are required for the martingale test but absent")]
    MissingBranching,
    #[error("grid: {0}")]
    Grid(GridError),
    #[error("convergence study needs at least {min} dt levels, got {got}")]
    TooFewDtLevels { min: usize, got: usize },
    #[error("bad dt levels: {detail}")]
    BadDtLevels { detail: String },
    #[error("comparison requires identical Hermitian correlations: {detail}")]
    AlphaMismatch { detail: String },
    #[error("comparison requires both configs to share the same {what}")]
    ComparisonShapeMismatch { what: &'static str },
}

/// Parameters of the conditional branching test: freeze each of `n_prefixes`
/// noise prefixes at time `s`, then draw `m_continuations` conditional
/// futures per prefix and compare the conditional mean squared norm at
/// `s + offset` for each checkpoint offset against the frozen squared norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchingParams {
    pub s: f64,
    pub n_prefixes: usize,
    pub m_continuations: usize,
    pub checkpoint_offsets: Vec<f64>,
}

impl BranchingParams {
    /// The default test shape at branch time `s`: 64 prefixes, 1000
    /// continuations each, checkpoints at the default offsets.
    pub fn reference(s: f64) -> Self {
        Self {
            s,
            n_prefixes: 64,
            m_continuations: 1000,
            checkpoint_offsets: DEFAULT_CHECKPOINT_OFFSETS.to_vec(),
        }
    }
}

/// A complete, self-contained description of one Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub pair: CorrelationPair,
    pub grid: TimeGrid,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub integrator: IntegratorKind,
    /// Number of density-matrix snapshots after t = 0; must divide the step
    /// count. Norm statistics are recorded at the same times.
    pub n_snapshots: usize,
    /// Present only for branching experiments.
    pub branching: Option<BranchingParams>,
    /// Worker threads; `None` defers to the env var / machine parallelism.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Check every statically checkable invariant. Call once before running;
    /// the runners assume a validated config.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_trajectories < 2 {
            return Err(ConfigError::TooFewTrajectories(self.n_trajectories));
        }
        let n_steps = self.grid.n_steps();
        if self.n_snapshots < 1 || n_steps % self.n_snapshots != 0 {
            return Err(ConfigError::SnapshotsDoNotDivide {
                n_snapshots: self.n_snapshots,
                n_steps,
            });
        }
        let report = validate_pair(&self.pair, self.grid.t_max());
        if !report.accepted {
            return Err(ConfigError::PairRejected { reasons: report.violations.join("; ") });
        }
        // Surfaces integrator/pair/model incompatibilities (colored x under
        // the Ito stepper, off-diagonal operators under the exact propagator).
        Engine::prepare(&self.model, &self.pair, self.integrator)?;
        if let Some(workers) = self.workers {
            if workers == 0 {
                return Err(ConfigError::ZeroWorkers);
            }
        }
        if let Some(branching) = &self.branching {
            self.validate_branching(branching)?;
        }
        Ok(())
    }

    fn validate_branching(&self, b: &BranchingParams) -> Result<(), ConfigError> {
        let t_max = self.grid.t_max();
        if !(b.s > 0.0 && b.s < t_max) {
            return Err(ConfigError::BranchTimeOutsideHorizon { s: b.s, t_max });
        }
        if b.n_prefixes < 2 {
            return Err(ConfigError::TooFewPrefixes(b.n_prefixes));
        }
        if b.m_continuations < MIN_CONTINUATIONS {
            return Err(ConfigError::TooFewContinuations(b.m_continuations));
        }
        let increasing = b
            .checkpoint_offsets
            .windows(2)
            .all(|w| w[1] > w[0]);
        if b.checkpoint_offsets.is_empty()
            || b.checkpoint_offsets[0] <= 0.0
            || !increasing
        {
            return Err(ConfigError::BadCheckpointOffsets(b.checkpoint_offsets.clone()));
        }
        self.grid.index_of(b.s).map_err(|source| ConfigError::OffGrid { t: b.s, source })?;
        for &offset in &b.checkpoint_offsets {
            let t = b.s + offset;
            if t > t_max + 1e-12 {
                return Err(ConfigError::CheckpointBeyondHorizon { offset, t, t_max });
            }
            self.grid.index_of(t).map_err(|source| ConfigError::OffGrid { t, source })?;
        }
        Ok(())
    }

    /// Grid indices of the branch time and of every checkpoint, in offset
    /// order. Assumes `validate` passed.
    pub fn branch_indices(&self) -> Result<(usize, Vec<usize>), ConfigError> {
        let b = self.branching.as_ref().ok_or(ConfigError::MissingBranching)?;
        let s_idx =
            self.grid.index_of(b.s).map_err(|source| ConfigError::OffGrid { t: b.s, source })?;
        let mut checkpoints = Vec::with_capacity(b.checkpoint_offsets.len());
        for &offset in &b.checkpoint_offsets {
            let t = b.s + offset;
            checkpoints
                .push(self.grid.index_of(t).map_err(|source| ConfigError::OffGrid { t, source })?);
        }
        Ok((s_idx, checkpoints))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Kernel;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelSpec::spin_boson(1.0, 1.0).unwrap(),
            pair: CorrelationPair::new(
                vec![Kernel::white(0.5)],
                vec![Kernel::exp_decay(1.0, 1.0)],
            ),
            grid: TimeGrid::new(2.0, 1e-3).unwrap(),
            n_trajectories: 100,
            master_seed: 7,
            integrator: IntegratorKind::EmIto,
            n_snapshots: 20,
            branching: None,
            workers: None,
        }
    }

    #[test]
    fn accepts_reference_configuration() {
        base_config().validate().unwrap();
        let mut with_branching = base_config();
        with_branching.branching = Some(BranchingParams::reference(0.5));
        with_branching.validate().unwrap();
        let (s_idx, cks) = with_branching.branch_indices().unwrap();
        assert_eq!(s_idx, 500);
        assert_eq!(cks, vec![600, 1000, 1500]);
    }

    #[test]
    fn rejects_incompatible_integrator() {
        let mut cfg = base_config();
        cfg.pair =
            CorrelationPair::new(vec![Kernel::exp_decay(1.0, 1.0)], vec![]);
        assert!(matches!(cfg.validate(), Err(ConfigError::Integrator(_))));
    }

    #[test]
    fn rejects_branch_time_outside_horizon() {
        for s in [0.0, 2.0, 2.5, -0.5] {
            let mut cfg = base_config();
            let mut b = BranchingParams::reference(s);
            b.checkpoint_offsets = vec![1e-3];
            cfg.branching = Some(b);
            assert!(
                matches!(cfg.validate(), Err(ConfigError::BranchTimeOutsideHorizon { .. })),
                "s = {s} should be rejected"
            );
        }
    }

    #[test]
    fn rejects_checkpoint_beyond_horizon_and_off_grid() {
        let mut cfg = base_config();
        cfg.branching = Some(BranchingParams::reference(1.5));
        assert!(matches!(cfg.validate(), Err(ConfigError::CheckpointBeyondHorizon { .. })));

        let mut cfg = base_config();
        let mut b = BranchingParams::reference(0.5);
        b.checkpoint_offsets = vec![0.10005];
        cfg.branching = Some(b);
        assert!(matches!(cfg.validate(), Err(ConfigError::OffGrid { .. })));
    }

    #[test]
    fn rejects_small_branching_shapes() {
        let mut cfg = base_config();
        let mut b = BranchingParams::reference(0.5);
        b.m_continuations = 99;
        cfg.branching = Some(b);
        assert!(matches!(cfg.validate(), Err(ConfigError::TooFewContinuations(99))));

        let mut cfg = base_config();
        let mut b = BranchingParams::reference(0.5);
        b.n_prefixes = 1;
        cfg.branching = Some(b);
        assert!(matches!(cfg.validate(), Err(ConfigError::TooFewPrefixes(1))));

        let mut cfg = base_config();
        let mut b = BranchingParams::reference(0.5);
        b.checkpoint_offsets = vec![0.5, 0.1];
        cfg.branching = Some(b);
        assert!(matches!(cfg.validate(), Err(ConfigError::BadCheckpointOffsets(_))));
    }

    #[test]
    fn rejects_snapshots_not_dividing_steps_and_bad_counts() {
        let mut cfg = base_config();
        cfg.n_snapshots = 7;
        assert!(matches!(cfg.validate(), Err(ConfigError::SnapshotsDoNotDivide { .. })));

        let mut cfg = base_config();
        cfg.n_trajectories = 1;
        assert!(matches!(cfg.validate(), Err(ConfigError::TooFewTrajectories(1))));

        let mut cfg = base_config();
        cfg.workers = Some(0);
        assert!(matches!(cfg.validate(), Err(ConfigError::ZeroWorkers)));
    }

    #[test]
    fn rejects_inadmissible_pair() {
        let mut cfg = base_config();
        cfg.pair = CorrelationPair::new(
            vec![Kernel::white(0.5)],
            vec![Kernel::exp_decay(-1.0, 1.0)],
        );
        let err = cfg.validate().unwrap_err();
        match err {
            ConfigError::PairRejected { reasons } => {
                assert!(!reasons.is_empty());
            }
            other => panic!("expected PairRejected, got {other:?}"),
        }
    }
}
