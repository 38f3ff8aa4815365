//! Finite-difference residual check of the time-local averaged-state
//! equation for diagonal-coupling models:
//!
//! ```text
//! d rho/dt = -i [H, rho] + 2 m(t) (L rho L^dag - (1/2){L^dag L, rho}),
//! m(t) = Int_0^t alpha(t,s) ds.
//! ```
//!
//! When alpha is purely white, `2 m(t)` is the constant total white weight
//! and the equation is the fixed-rate memoryless one; colored kernels give
//! a genuinely time-dependent coefficient. The check accumulates, per
//! trajectory, the residual of the central-difference derivative of the
//! projector series against this right-hand side. Accumulating per
//! trajectory (rather than differencing the final mean) gives the residual
//! mean the correct Monte Carlo error bars: snapshots of one trajectory
//! are strongly correlated in time, and that correlation cancels most of
//! the naive variance.
//!
//! The only systematic error left in the mean residual is the
//! finite-difference truncation bias, estimated per entry by Richardson
//! comparison of the half- and full-spacing central differences on the
//! ensemble mean. The pass rule at each interior time: the largest
//! residual entry magnitude must not exceed 3 x its Monte Carlo standard
//! error + the estimated truncation bias (+ a tiny absolute floor for the
//! noise-free case).

use super::OracleError;
use crate::linalg::{ComplexMatrix, StateVector, C64};
use crate::noise::CorrelationPair;

/// Central differences need at least this many snapshots per unit time.
pub const MIN_POINTS_PER_UNIT_TIME: f64 = 20.0;

/// Absolute slack added to every bound so that exactly-deterministic
/// ensembles (zero noise) are not failed by higher-order truncation terms.
const RESIDUAL_FLOOR: f64 = 1e-9;

/// The Richardson comparison understates the truncation bias of an
/// oscillatory mean by a relative O((omega dt)^2) term (the next order of
/// the sin-series of the central difference), so the estimate is inflated
/// by this factor; 1.1 covers phase gradients up to omega dt ~ 0.7.
const FD_BIAS_SAFETY: f64 = 1.1;

/// One matrix entry of the finalized residual at one time.
#[derive(Debug, Clone, Copy)]
pub struct EntryResidual {
    /// Mean residual entry over the ensemble.
    pub mean: C64,
    /// Monte Carlo standard error of `|mean|` (quadrature of Re and Im).
    pub se: f64,
    /// Richardson estimate of the finite-difference truncation bias.
    pub fd_bias: f64,
}

/// Finalized residual series and verdict.
#[derive(Debug, Clone)]
pub struct MasterResidualReport {
    /// Interior snapshot times where the derivative was formed.
    pub times: Vec<f64>,
    /// `[time][entry]`, entries row-major over the dim x dim matrix.
    pub entries: Vec<Vec<EntryResidual>>,
    /// Per time: worst entry's `|mean| / (3 se + fd_bias + floor)`.
    pub margins: Vec<f64>,
    /// Per time: largest residual entry magnitude.
    pub max_abs_mean: Vec<f64>,
    /// The time-local dissipator coefficient `2 m(t)` at each interior time.
    pub rates: Vec<f64>,
    pub n: u64,
    /// True when every margin is <= 1.
    pub pass: bool,
}

/// Online accumulator for the residual check. Feed every trajectory's
/// snapshot states, merge accumulators from parallel blocks pairwise, then
/// finalize. Merging is a plain entrywise sum, so a fixed block structure
/// and reduction tree give bit-identical results for any worker count.
#[derive(Debug, Clone)]
pub struct MasterResidualAccumulator {
    dim: usize,
    times: Vec<f64>,
    dt: f64,
    h: ComplexMatrix,
    l: ComplexMatrix,
    l_adj_l: ComplexMatrix,
    /// `2 m(t_j)` for every snapshot index.
    rates: Vec<f64>,
    n: u64,
    /// Sum of projectors at every snapshot (for Richardson differencing).
    sum_p: Vec<ComplexMatrix>,
    /// Sum of per-trajectory residuals at interior snapshots `1..=S-2`.
    sum_r: Vec<ComplexMatrix>,
    /// Sums of squared Re/Im residual entries, `[interior][entry]`.
    sum_r_sq_re: Vec<Vec<f64>>,
    sum_r_sq_im: Vec<Vec<f64>>,
}

impl MasterResidualAccumulator {
    /// `times` must be a uniform grid starting at 0 with spacing at most
    /// `1 / MIN_POINTS_PER_UNIT_TIME` and at least five points.
    pub fn new(
        h: &ComplexMatrix,
        l: &ComplexMatrix,
        pair: &CorrelationPair,
        times: &[f64],
    ) -> Result<Self, OracleError> {
        if !h.is_square() || !l.is_square() || h.rows() != l.rows() {
            return Err(OracleError::BadSpec {
                reason: "H and L must be square and equal-dimensional".into(),
            });
        }
        if times.len() < 5 {
            return Err(OracleError::BadTimes {
                reason: format!("need at least 5 snapshots, got {}", times.len()),
            });
        }
        if times[0].abs() > 1e-12 {
            return Err(OracleError::BadTimes {
                reason: format!("snapshot series must start at 0, got {}", times[0]),
            });
        }
        let dt = times[1] - times[0];
        if dt <= 0.0 {
            return Err(OracleError::BadTimes { reason: "non-increasing times".into() });
        }
        for (j, &t) in times.iter().enumerate() {
            if (t - j as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(OracleError::BadTimes {
                    reason: format!("snapshot series not uniform at index {j}"),
                });
            }
        }
        if dt > 1.0 / MIN_POINTS_PER_UNIT_TIME + 1e-12 {
            return Err(OracleError::StrideTooCoarse {
                dt,
                min_per_unit: MIN_POINTS_PER_UNIT_TIME,
            });
        }
        let dim = h.rows();
        let interior = times.len() - 2;
        Ok(Self {
            dim,
            times: times.to_vec(),
            dt,
            h: h.clone(),
            l: l.clone(),
            l_adj_l: l.conj_transpose().matmul(l),
            rates: times.iter().map(|&t| 2.0 * pair.alpha_running_integral(t)).collect(),
            n: 0,
            sum_p: vec![ComplexMatrix::zeros(dim, dim); times.len()],
            sum_r: vec![ComplexMatrix::zeros(dim, dim); interior],
            sum_r_sq_re: vec![vec![0.0; dim * dim]; interior],
            sum_r_sq_im: vec![vec![0.0; dim * dim]; interior],
        })
    }

    /// Right-hand side applied to one projector at snapshot index `j`.
    fn rhs(&self, p: &ComplexMatrix, j: usize) -> ComplexMatrix {
        let minus_i = C64::new(0.0, -1.0);
        let comm = self.h.matmul(p).sub(&p.matmul(&self.h)).scale(minus_i);
        let jump = self.l.matmul(p).matmul(&self.l.conj_transpose());
        let anti = self
            .l_adj_l
            .matmul(p)
            .add(&p.matmul(&self.l_adj_l))
            .scale(C64::new(0.5, 0.0));
        comm.add(&jump.sub(&anti).scale(C64::new(self.rates[j], 0.0)))
    }

    /// Accumulate one trajectory's snapshot states (unnormalized, one per
    /// snapshot time including t = 0).
    pub fn add_trajectory(&mut self, states: &[StateVector]) {
        assert_eq!(states.len(), self.times.len(), "snapshot count mismatch");
        let projectors: Vec<ComplexMatrix> = states.iter().map(|s| s.outer()).collect();
        for (j, p) in projectors.iter().enumerate() {
            self.sum_p[j] = self.sum_p[j].add(p);
        }
        let half = 0.5 / self.dt;
        for j in 1..self.times.len() - 1 {
            let fd = projectors[j + 1].sub(&projectors[j - 1]).scale(C64::new(half, 0.0));
            let r = fd.sub(&self.rhs(&projectors[j], j));
            let slot = j - 1;
            for (e, v) in r.data().iter().enumerate() {
                self.sum_r_sq_re[slot][e] += v.re * v.re;
                self.sum_r_sq_im[slot][e] += v.im * v.im;
            }
            self.sum_r[slot] = self.sum_r[slot].add(&r);
        }
        self.n += 1;
    }

    /// Entrywise sum of two accumulators over the same grid and model.
    pub fn merge(mut self, other: Self) -> Self {
        assert_eq!(self.times, other.times, "grid mismatch in merge");
        assert_eq!(self.dim, other.dim, "dimension mismatch in merge");
        self.n += other.n;
        for (a, b) in self.sum_p.iter_mut().zip(&other.sum_p) {
            *a = a.add(b);
        }
        for (a, b) in self.sum_r.iter_mut().zip(&other.sum_r) {
            *a = a.add(b);
        }
        for (a, b) in self.sum_r_sq_re.iter_mut().zip(&other.sum_r_sq_re) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.sum_r_sq_im.iter_mut().zip(&other.sum_r_sq_im) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn finalize(&self) -> Result<MasterResidualReport, OracleError> {
        if self.n < 2 {
            return Err(OracleError::EmptyEnsemble { n: self.n });
        }
        let nf = self.n as f64;
        let s = self.times.len();
        let mean_p: Vec<ComplexMatrix> =
            self.sum_p.iter().map(|m| m.scale(C64::new(1.0 / nf, 0.0))).collect();

        let mut times = Vec::with_capacity(s - 2);
        let mut entries = Vec::with_capacity(s - 2);
        let mut margins = Vec::with_capacity(s - 2);
        let mut max_abs = Vec::with_capacity(s - 2);
        let mut rates = Vec::with_capacity(s - 2);
        for j in 1..s - 1 {
            let slot = j - 1;
            let mean_r = self.sum_r[slot].scale(C64::new(1.0 / nf, 0.0));
            // Richardson: central differences of the mean at spacings dt
            // and 2 dt differ by ~3x the dt-spacing bias. At the two edge
            // interior points the 2 dt stencil does not fit; borrow the
            // nearest interior estimate (the bias varies smoothly).
            let jr = j.clamp(2, s - 3);
            let fd1 = mean_p[jr + 1]
                .sub(&mean_p[jr - 1])
                .scale(C64::new(0.5 / self.dt, 0.0));
            let fd2 = mean_p[jr + 2]
                .sub(&mean_p[jr - 2])
                .scale(C64::new(0.25 / self.dt, 0.0));
            let bias = fd2.sub(&fd1).scale(C64::new(1.0 / 3.0, 0.0));

            let mut row = Vec::with_capacity(self.dim * self.dim);
            let mut worst_margin: f64 = 0.0;
            let mut worst_abs: f64 = 0.0;
            for e in 0..self.dim * self.dim {
                let mean = mean_r.data()[e];
                let var_re =
                    (self.sum_r_sq_re[slot][e] / nf - mean.re * mean.re).max(0.0);
                let var_im =
                    (self.sum_r_sq_im[slot][e] / nf - mean.im * mean.im).max(0.0);
                let se = ((var_re + var_im) / nf).sqrt();
                let fd_bias = FD_BIAS_SAFETY * bias.data()[e].norm();
                row.push(EntryResidual { mean, se, fd_bias });
                let bound = 3.0 * se + fd_bias + RESIDUAL_FLOOR;
                worst_margin = worst_margin.max(mean.norm() / bound);
                worst_abs = worst_abs.max(mean.norm());
            }
            times.push(self.times[j]);
            entries.push(row);
            margins.push(worst_margin);
            max_abs.push(worst_abs);
            rates.push(self.rates[j]);
        }
        let pass = margins.iter().all(|&m| m <= 1.0);
        Ok(MasterResidualReport {
            times,
            entries,
            margins,
            max_abs_mean: max_abs,
            rates,
            n: self.n,
            pass,
        })
    }
}
