//! Trajectory propagation for the linear colored-noise Schrodinger equation.
//!
//! The equation of motion for one noise realization z*_t = x_t - i y_t is
//!
//! ```text
//! d/dt psi = -i H psi + z*_t L psi
//!            - [F_alpha(t) L^dag + F_eta(t) L] L psi
//! ```
//!
//! where `F_alpha(t) = int_0^t alpha(t,s) ds` and `F_eta(t) = int_0^t
//! eta(t,s) ds` are running kernel integrals (closed form for white and
//! exponential kernels). Two steppers cover the two noise regimes:
//!
//! **White-x stepper (Ito Euler-Maruyama).** When x is purely white with
//! weight kappa/2 (so alpha + eta = kappa*delta) and y is purely colored,
//! the memory term collapses to -(kappa/2) L^2 psi: the delta function
//! contributes its endpoint half-weight kappa/4 to each of the L^dag L and
//! L L terms, written with L^2 throughout because the collapse is derived
//! for the self-adjoint couplings the white-noise theory addresses (the
//! stepper still *runs* for non-self-adjoint L — the martingale property is
//! then expected to fail, which is the point of negative controls).
//! The white term `x_t L psi dt` is read in the **Stratonovich** sense —
//! x_t is the idealized limit of a physical colored noise, and the colored
//! equation is an ordinary ODE per realization, so the Wong-Zakai limit of
//! its solutions solves the Stratonovich equation. Converting to Ito form
//! for simulation costs the correction + (kappa/4) L^2 psi dt (half the
//! diffusion coefficient's derivative), leaving
//!
//! ```text
//! d psi = [-i H - (kappa/4) L^2] psi dt - i y_t L psi dt
//!         + sqrt(kappa/2) L psi dW_t        (Ito)
//! ```
//!
//! Under this convention, for self-adjoint L the Ito drift of |psi|^2
//! vanishes identically: d|psi|^2 = psi^dag[-(kappa/4)(L^2 + L^dag^2)
//! + (kappa/2) L^dag L]psi dt = 0, i.e. the squared norm is a martingale —
//! with a naive Ito reading of the white-noise term it would not be.
//!
//! **Colored stepper (Heun).** When both components are colored, the
//! realization is smooth enough to treat the equation as a time-dependent
//! linear ODE; a Heun predictor-corrector gives order-2 accuracy per
//! realization. F_alpha, F_eta are evaluated at absolute time from their
//! closed forms.
//!
//! Norms are tracked at every step; a squared norm above 1e100 aborts the
//! trajectory with a diagnostic rather than propagating infinities.

use crate::linalg::{ComplexMatrix, StateVector, C64};
use crate::noise::kernel::running_integral;
use crate::noise::{CorrelationPair, NoiseRealization, TimeGrid};
use crate::sse::dephasing::DephasingCtx;
use crate::sse::model::ModelSpec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Squared-norm threshold that aborts a trajectory.
pub const OVERFLOW_NORM_SQ: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    EmIto,
    HeunStrat,
    DephasingExact,
}

impl std::fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            IntegratorKind::EmIto => "em_ito",
            IntegratorKind::HeunStrat => "heun_strat",
            IntegratorKind::DephasingExact => "dephasing_exact",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum SseError {
    #[error("squared norm {norm_sq:.3e} exceeded {OVERFLOW_NORM_SQ:.0e} at step {step}; trajectory aborted")]
    Overflow { step: usize, norm_sq: f64 },
    #[error("integrator {integrator} cannot run this noise pair: {reason}")]
    IncompatibleNoise { integrator: IntegratorKind, reason: String },
    #[error("exact dephasing propagation requires diagonal H and L; {operator} has off-diagonal magnitude {deviation:.3e}")]
    NotDiagonal { operator: &'static str, deviation: f64 },
    #[error("propagator matrix is numerically singular (condition estimate {cond:.3e} > 1e12)")]
    SingularPropagator { cond: f64 },
    #[error("propagator evolution limited to dimension 16, model has {dim}")]
    PropagatorDimTooLarge { dim: usize },
    #[error("noise segment covers {have} steps but {want} were requested")]
    SegmentMismatch { have: usize, want: usize },
}

/// White-x Euler-Maruyama stepper state: constant Ito drift matrix plus the
/// coupling operator and the white-noise scale.
#[derive(Debug, Clone)]
pub struct EmCtx {
    drift: ComplexMatrix, // -iH - (kappa/4) L^2
    l: ComplexMatrix,
    sqrt_half_kappa: f64,
}

impl EmCtx {
    pub fn new(model: &ModelSpec, pair: &CorrelationPair) -> Result<Self, SseError> {
        if !pair.satisfies_delta_constraint() {
            return Err(SseError::IncompatibleNoise {
                integrator: IntegratorKind::EmIto,
                reason: format!(
                    "x must be purely white (constraint residual {:.3e} != 0)",
                    pair.delta_constraint_residual()
                ),
            });
        }
        if pair.y_white_weight() > 0.0 {
            return Err(SseError::IncompatibleNoise {
                integrator: IntegratorKind::EmIto,
                reason: "y must be purely colored; its white part has no value representation"
                    .to_string(),
            });
        }
        let kappa = pair.kappa();
        let minus_i = C64::new(0.0, -1.0);
        let l_sq = model.l.matmul(&model.l);
        let drift = model
            .h
            .scale(minus_i)
            .add(&l_sq.scale(C64::new(-kappa / 4.0, 0.0)));
        Ok(Self { drift, l: model.l.clone(), sqrt_half_kappa: (kappa / 2.0).sqrt() })
    }

    /// One Ito Euler-Maruyama step: psi + dt*drift*psi
    /// + (sqrt(kappa/2) dW - i y dt) L psi.
    pub fn step(&self, psi: &mut [C64], dw: f64, y_value: f64, dt: f64, scratch: &mut Scratch) {
        let (lv, dv) = scratch.two();
        matvec_into(&self.l, psi, lv);
        matvec_into(&self.drift, psi, dv);
        let noise_coeff = C64::new(self.sqrt_half_kappa * dw, -y_value * dt);
        for i in 0..psi.len() {
            psi[i] += dt * dv[i] + noise_coeff * lv[i];
        }
    }
}

/// Colored-noise Heun stepper state.
#[derive(Debug, Clone)]
pub struct HeunCtx {
    h: ComplexMatrix,
    l: ComplexMatrix,
    l_adj: ComplexMatrix,
    pair: CorrelationPair,
}

impl HeunCtx {
    pub fn new(model: &ModelSpec, pair: &CorrelationPair) -> Result<Self, SseError> {
        if !pair.is_all_colored() {
            return Err(SseError::IncompatibleNoise {
                integrator: IntegratorKind::HeunStrat,
                reason: "white kernel components are not differentiable noise; use the white-x stepper".to_string(),
            });
        }
        Ok(Self {
            h: model.h.clone(),
            l: model.l.clone(),
            l_adj: model.l.conj_transpose(),
            pair: pair.clone(),
        })
    }

    /// Right-hand side f(t, psi) with noise values (x, y) at time t.
    #[allow(clippy::too_many_arguments)]
    fn rhs(
        &self,
        t: f64,
        psi: &[C64],
        x: f64,
        y: f64,
        out: &mut [C64],
        lv: &mut [C64],
        hv: &mut [C64],
        mem: &mut [C64],
    ) {
        let f_x = running_integral(&self.pair.x, t);
        let f_y = running_integral(&self.pair.y, t);
        let f_alpha = f_x + f_y;
        let f_eta = f_x - f_y;
        matvec_into(&self.l, psi, lv);
        matvec_into(&self.h, psi, hv);
        // memory term: [F_alpha L^dag + F_eta L] (L psi); build L^dag(L psi)
        // into `mem`, then reuse `hv`-independent buffers for L(L psi)
        matvec_into(&self.l_adj, lv, mem);
        matvec_into(&self.l, lv, out); // out temporarily holds L(L psi)
        let z = C64::new(x, -y);
        let minus_i = C64::new(0.0, -1.0);
        for i in 0..psi.len() {
            out[i] = minus_i * hv[i] - f_alpha * mem[i] - f_eta * out[i] + z * lv[i];
        }
    }

    /// One Heun predictor-corrector step from t0 to t0+dt with noise values
    /// at both endpoints.
    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &self,
        psi: &mut [C64],
        t0: f64,
        dt: f64,
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        scratch: &mut Scratch,
    ) {
        let [lv, hv, mem, k1, k2, pred] = scratch.six();
        self.rhs(t0, psi, x0, y0, k1, lv, hv, mem);
        for i in 0..psi.len() {
            pred[i] = psi[i] + dt * k1[i];
        }
        self.rhs(t0 + dt, pred, x1, y1, k2, lv, hv, mem);
        let half_dt = 0.5 * dt;
        for i in 0..psi.len() {
            psi[i] += half_dt * (k1[i] + k2[i]);
        }
    }
}

/// Prepared stepper for one (model, pair, integrator) combination; shared
/// read-only across trajectories.
#[derive(Debug, Clone)]
pub enum Engine {
    Em(EmCtx),
    Heun(HeunCtx),
    Exact(DephasingCtx),
}

impl Engine {
    pub fn prepare(
        model: &ModelSpec,
        pair: &CorrelationPair,
        kind: IntegratorKind,
    ) -> Result<Self, SseError> {
        match kind {
            IntegratorKind::EmIto => Ok(Engine::Em(EmCtx::new(model, pair)?)),
            IntegratorKind::HeunStrat => Ok(Engine::Heun(HeunCtx::new(model, pair)?)),
            IntegratorKind::DephasingExact => Ok(Engine::Exact(DephasingCtx::new(model, pair)?)),
        }
    }

    pub fn kind(&self) -> IntegratorKind {
        match self {
            Engine::Em(_) => IntegratorKind::EmIto,
            Engine::Heun(_) => IntegratorKind::HeunStrat,
            Engine::Exact(_) => IntegratorKind::DephasingExact,
        }
    }
}

/// Reusable per-trajectory work buffers.
#[derive(Debug)]
pub struct Scratch {
    bufs: Vec<Vec<C64>>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Self { bufs: (0..6).map(|_| vec![C64::new(0.0, 0.0); dim]).collect() }
    }

    fn two(&mut self) -> (&mut [C64], &mut [C64]) {
        let [a, b, ..] = &mut self.bufs[..] else { unreachable!() };
        (a, b)
    }

    fn six(&mut self) -> [&mut Vec<C64>; 6] {
        let [a, b, c, d, e, f] = &mut self.bufs[..] else { unreachable!() };
        [a, b, c, d, e, f]
    }
}

pub(crate) fn matvec_into(m: &ComplexMatrix, v: &[C64], out: &mut [C64]) {
    let n = m.rows();
    let data = m.data();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = C64::new(0.0, 0.0);
        let row = &data[i * n..(i + 1) * n];
        for (mij, vj) in row.iter().zip(v) {
            acc += mij * vj;
        }
        *o = acc;
    }
}

/// Advance `psi` through every step covered by the noise segment, invoking
/// `on_step(absolute_index, psi, norm_sq)` after each step. The starting
/// absolute index is `seg.start_index`; times are `index * grid.dt()`.
pub fn propagate_segment(
    engine: &Engine,
    psi: &mut Vec<C64>,
    grid: &TimeGrid,
    seg: &NoiseRealization,
    scratch: &mut Scratch,
    mut on_step: impl FnMut(usize, &[C64], f64),
) -> Result<(), SseError> {
    let dt = grid.dt();
    for k in 0..seg.steps {
        let abs = seg.start_index + k;
        match engine {
            Engine::Em(ctx) => {
                ctx.step(psi, seg.white_x[k], seg.colored_y[k], dt, scratch);
            }
            Engine::Heun(ctx) => {
                let t0 = abs as f64 * dt;
                ctx.step(
                    psi,
                    t0,
                    dt,
                    seg.colored_x[k],
                    seg.colored_y[k],
                    seg.colored_x[k + 1],
                    seg.colored_y[k + 1],
                    scratch,
                );
            }
            Engine::Exact(ctx) => {
                ctx.step(psi, abs, k, dt, seg);
            }
        }
        let norm_sq: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || norm_sq > OVERFLOW_NORM_SQ {
            return Err(SseError::Overflow { step: abs + 1, norm_sq });
        }
        on_step(abs + 1, psi, norm_sq);
    }
    Ok(())
}

/// One trajectory's output: states at snapshot indices (stride chosen by the
/// caller) plus the squared norm at every grid point.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub snapshot_indices: Vec<usize>,
    pub states: Vec<StateVector>,
    pub norms_sq: Vec<f64>,
}

/// Propagate the model's initial state across the full grid, recording
/// `n_snapshots + 1` states (including t = 0) and the norm at every step.
/// `n_snapshots` must divide the step count.
pub fn run_trajectory(
    engine: &Engine,
    model: &ModelSpec,
    grid: &TimeGrid,
    realization: &NoiseRealization,
    n_snapshots: usize,
) -> Result<TrajectoryResult, SseError> {
    let n_steps = grid.n_steps();
    if realization.start_index != 0 || realization.steps != n_steps {
        return Err(SseError::SegmentMismatch { have: realization.steps, want: n_steps });
    }
    assert!(n_snapshots >= 1 && n_steps % n_snapshots == 0, "snapshot count must divide steps");
    let stride = n_steps / n_snapshots;
    let mut psi = model.psi0.amps.clone();
    let mut norms_sq = Vec::with_capacity(n_steps + 1);
    norms_sq.push(psi.iter().map(|a| a.norm_sqr()).sum());
    let mut snapshot_indices = vec![0];
    let mut states = vec![StateVector::new(psi.clone())];
    let mut scratch = Scratch::new(model.dim);
    propagate_segment(engine, &mut psi, grid, realization, &mut scratch, |idx, state, nsq| {
        norms_sq.push(nsq);
        if idx % stride == 0 {
            snapshot_indices.push(idx);
            states.push(StateVector::new(state.to_vec()));
        }
    })?;
    Ok(TrajectoryResult { snapshot_indices, states, norms_sq })
}
