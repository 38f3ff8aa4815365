//! Matrix-valued flow of the linear trajectory equation.
//!
//! The equation is linear in psi, so for a fixed noise realization the map
//! psi_0 -> psi_t is a matrix G_t (G_0 = identity). Evolving the basis
//! columns under the same stepper yields G_t at snapshot times; the
//! two-time map A_{s->t} = G_t G_s^{-1} then transports any state from s
//! to t without re-integration.

use crate::linalg::{condition_estimate, lu_factor, ComplexMatrix, C64};
use crate::noise::{NoiseRealization, TimeGrid};
use crate::sse::integrate::{propagate_segment, Engine, Scratch, SseError};

/// Condition-number ceiling for inverting a snapshot of the flow.
pub const PROPAGATOR_COND_LIMIT: f64 = 1e12;
/// Matrix propagation is d times the cost of a trajectory; keep d modest.
pub const PROPAGATOR_MAX_DIM: usize = 16;

/// Evolve the full flow matrix across the grid, returning `n_snapshots + 1`
/// pairs (grid index, G at that index), starting with (0, identity).
pub fn propagate_propagator(
    engine: &Engine,
    dim: usize,
    grid: &TimeGrid,
    realization: &NoiseRealization,
    n_snapshots: usize,
) -> Result<Vec<(usize, ComplexMatrix)>, SseError> {
    if dim > PROPAGATOR_MAX_DIM {
        return Err(SseError::PropagatorDimTooLarge { dim });
    }
    let n_steps = grid.n_steps();
    if realization.start_index != 0 || realization.steps != n_steps {
        return Err(SseError::SegmentMismatch { have: realization.steps, want: n_steps });
    }
    assert!(n_snapshots >= 1 && n_steps % n_snapshots == 0, "snapshot count must divide steps");
    let stride = n_steps / n_snapshots;
    // evolve each basis column, collecting its snapshot values
    let mut column_snaps: Vec<Vec<Vec<C64>>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[j] = C64::new(1.0, 0.0);
        let mut snaps = vec![psi.clone()];
        let mut scratch = Scratch::new(dim);
        propagate_segment(engine, &mut psi, grid, realization, &mut scratch, |idx, state, _| {
            if idx % stride == 0 {
                snaps.push(state.to_vec());
            }
        })?;
        column_snaps.push(snaps);
    }
    let mut out = Vec::with_capacity(n_snapshots + 1);
    for (s, snap_pos) in (0..=n_snapshots).enumerate() {
        let idx = snap_pos * stride;
        let mut g = ComplexMatrix::zeros(dim, dim);
        for (j, snaps) in column_snaps.iter().enumerate() {
            for i in 0..dim {
                g[(i, j)] = snaps[s][i];
            }
        }
        out.push((idx, g));
    }
    Ok(out)
}

/// Two-time transport map A_{s->t} = G_t G_s^{-1}; fails when G_s is too
/// ill-conditioned to invert reliably.
pub fn two_time_map(g_t: &ComplexMatrix, g_s: &ComplexMatrix) -> Result<ComplexMatrix, SseError> {
    let cond = condition_estimate(g_s)
        .map_err(|_| SseError::SingularPropagator { cond: f64::INFINITY })?;
    if cond > PROPAGATOR_COND_LIMIT {
        return Err(SseError::SingularPropagator { cond });
    }
    let inv = lu_factor(g_s)
        .map_err(|_| SseError::SingularPropagator { cond: f64::INFINITY })?
        .inverse();
    Ok(g_t.matmul(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matexp;
    use crate::noise::{sample_realization, CorrelationPair, Kernel};
    use crate::rng::{substream, StreamPurpose};
    use crate::sse::integrate::{run_trajectory, IntegratorKind};
    use crate::sse::model::ModelSpec;

    fn rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.sub(b).norm_fro() / b.norm_fro().max(1e-300)
    }

    #[test]
    fn zero_noise_flow_is_the_matrix_exponential() {
        let model = ModelSpec::dephasing(1.0, 1.0).unwrap();
        let pair = CorrelationPair::new(vec![], vec![]);
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        let mut rng = substream(1, StreamPurpose::Trajectory, 0, 0);
        let seg = sample_realization(&pair, &grid, true, &mut rng);
        let engine = Engine::prepare(&model, &pair, IntegratorKind::DephasingExact).unwrap();
        let gs = propagate_propagator(&engine, 2, &grid, &seg, 4).unwrap();
        for (idx, g) in &gs {
            let t = *idx as f64 * grid.dt();
            let want = matexp(&model.h.scale(C64::new(0.0, -1.0)), t).unwrap();
            assert!(rel_err(g, &want) < 1e-12, "t = {t}");
            // unitarity
            let gtg = g.conj_transpose().matmul(g);
            assert!(rel_err(&gtg, &ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn flow_applied_to_initial_state_matches_direct_propagation() {
        let model = ModelSpec::spin_boson(1.0, 1.0).unwrap();
        let pair =
            CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::exp_decay(1.0, 1.0)]);
        let grid = TimeGrid::new(0.5, 1e-3).unwrap();
        let mut rng = substream(2, StreamPurpose::Trajectory, 5, 0);
        let seg = sample_realization(&pair, &grid, true, &mut rng);
        let engine = Engine::prepare(&model, &pair, IntegratorKind::EmIto).unwrap();
        let gs = propagate_propagator(&engine, 2, &grid, &seg, 5).unwrap();
        let direct = run_trajectory(&engine, &model, &grid, &seg, 5).unwrap();
        for ((idx, g), state) in gs.iter().zip(&direct.states) {
            let via_flow = g.matvec(&model.psi0.amps);
            let err: f64 = via_flow
                .iter()
                .zip(&state.amps)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale: f64 = state.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-10 * scale.max(1.0), "index {idx}: err {err}");
        }
    }

    #[test]
    fn two_time_map_composes_the_flow() {
        let model = ModelSpec::spin_boson(1.0, 1.0).unwrap();
        let pair =
            CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::exp_decay(1.0, 1.0)]);
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        let mut rng = substream(3, StreamPurpose::Trajectory, 9, 0);
        let seg = sample_realization(&pair, &grid, true, &mut rng);
        let engine = Engine::prepare(&model, &pair, IntegratorKind::EmIto).unwrap();
        let gs = propagate_propagator(&engine, 2, &grid, &seg, 2).unwrap();
        let (_, g_half) = &gs[1];
        let (_, g_full) = &gs[2];
        let a = two_time_map(g_full, g_half).unwrap();
        let recomposed = a.matmul(g_half);
        assert!(rel_err(&recomposed, g_full) < 1e-8);
    }

    #[test]
    fn ill_conditioned_snapshots_are_refused() {
        let g_s = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1e-13]]);
        let g_t = ComplexMatrix::identity(2);
        assert!(matches!(
            two_time_map(&g_t, &g_s),
            Err(SseError::SingularPropagator { .. })
        ));
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let model = ModelSpec::qbm(1.0, 20).unwrap();
        let pair = CorrelationPair::new(vec![Kernel::white(0.5)], vec![]);
        let grid = TimeGrid::new(0.1, 1e-2).unwrap();
        let mut rng = substream(4, StreamPurpose::Trajectory, 0, 0);
        let seg = sample_realization(&pair, &grid, true, &mut rng);
        let engine = Engine::prepare(&model, &pair, IntegratorKind::EmIto).unwrap();
        assert!(matches!(
            propagate_propagator(&engine, 20, &grid, &seg, 1),
            Err(SseError::PropagatorDimTooLarge { dim: 20 })
        ));
    }
}
