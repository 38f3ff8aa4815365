//! Check that the reduced state depends on the noise only through the
//! Hermitian correlation.
//!
//! Two configurations whose pairs share the same Hermitian correlation (both
//! its white flux and its smooth part) but differ in the non-Hermitian one
//! must average to the same density matrices. The check runs both ensembles
//! and compares every snapshot's trace distance against the combined Monte
//! Carlo envelope.

use crate::linalg::trace_distance;
use crate::noise::{CorrelationPair, WhichCorrelation};

use super::run::{run_ensemble, EnsembleStats};
use super::{ConfigError, EnsembleError, ExperimentConfig};

/// Number of probe lags for the smooth-part equality precondition.
const ALPHA_PROBE_POINTS: usize = 64;

/// Tolerance for declaring the two Hermitian correlations identical: the
/// precondition is an exact structural property of the configs, not a
/// statistical estimate, so only rounding slack is allowed.
const ALPHA_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EtaReport {
    pub times: Vec<f64>,
    pub trace_distances: Vec<f64>,
    /// Combined one-sigma trace-distance envelopes of the two ensembles.
    pub envelopes: Vec<f64>,
    /// Largest ratio of trace distance to its envelope over t > 0.
    pub max_ratio: f64,
    pub pass: bool,
    pub stats_a: EnsembleStats,
    pub stats_b: EnsembleStats,
}

fn hermitian_correlations_match(
    a: &CorrelationPair,
    b: &CorrelationPair,
    t_max: f64,
) -> Result<(), ConfigError> {
    let (_, delta_a) = a.correlation_eval(WhichCorrelation::Alpha, 0.0);
    let (_, delta_b) = b.correlation_eval(WhichCorrelation::Alpha, 0.0);
    if (delta_a - delta_b).abs() > ALPHA_MATCH_TOL * delta_a.abs().max(1.0) {
        return Err(ConfigError::AlphaMismatch {
            detail: format!("white fluxes differ: {delta_a} vs {delta_b}"),
        });
    }
    for k in 0..=ALPHA_PROBE_POINTS {
        let tau = t_max * k as f64 / ALPHA_PROBE_POINTS as f64;
        let (sa, _) = a.correlation_eval(WhichCorrelation::Alpha, tau);
        let (sb, _) = b.correlation_eval(WhichCorrelation::Alpha, tau);
        if (sa - sb).abs() > ALPHA_MATCH_TOL * sa.abs().max(1.0) {
            return Err(ConfigError::AlphaMismatch {
                detail: format!("smooth parts differ at lag {tau}: {sa} vs {sb}"),
            });
        }
    }
    Ok(())
}

fn models_match(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<(), ConfigError> {
    let same_matrix = |x: &crate::linalg::ComplexMatrix, y: &crate::linalg::ComplexMatrix| {
        x.rows() == y.rows() && x.sub(y).norm_max() == 0.0
    };
    if a.model.dim != b.model.dim
        || !same_matrix(&a.model.h, &b.model.h)
        || !same_matrix(&a.model.l, &b.model.l)
        || a.model.psi0.amps != b.model.psi0.amps
    {
        return Err(ConfigError::ComparisonShapeMismatch { what: "model" });
    }
    if a.grid != b.grid {
        return Err(ConfigError::ComparisonShapeMismatch { what: "time grid" });
    }
    if a.n_trajectories != b.n_trajectories {
        return Err(ConfigError::ComparisonShapeMismatch { what: "trajectory count" });
    }
    if a.n_snapshots != b.n_snapshots {
        return Err(ConfigError::ComparisonShapeMismatch { what: "snapshot count" });
    }
    Ok(())
}

/// Run both configurations and verify that their averaged density matrices
/// agree within three combined Monte Carlo envelopes at every snapshot.
pub fn eta_independence_check(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
) -> Result<EtaReport, EnsembleError> {
    models_match(cfg_a, cfg_b)?;
    hermitian_correlations_match(&cfg_a.pair, &cfg_b.pair, cfg_a.grid.t_max())?;
    let stats_a = run_ensemble(cfg_a)?;
    let stats_b = run_ensemble(cfg_b)?;

    let points = stats_a.times.len();
    let mut trace_distances = Vec::with_capacity(points);
    let mut envelopes = Vec::with_capacity(points);
    let mut max_ratio: f64 = 0.0;
    let mut pass = true;
    for j in 0..points {
        let td = trace_distance(&stats_a.rho[j], &stats_b.rho[j])?;
        let env = (stats_a.trace_distance_envelope(j).powi(2)
            + stats_b.trace_distance_envelope(j).powi(2))
        .sqrt();
        // The floor keeps the deterministic t = 0 snapshot (zero envelope,
        // distance at rounding level) from failing the comparison.
        if td > 3.0 * env + 1e-12 {
            pass = false;
        }
        if env > 0.0 {
            max_ratio = max_ratio.max(td / env);
        }
        trace_distances.push(td);
        envelopes.push(env);
    }
    Ok(EtaReport {
        times: stats_a.times.clone(),
        trace_distances,
        envelopes,
        max_ratio,
        pass,
        stats_a,
        stats_b,
    })
}
