//! Exact sampling of noise realizations on the time grid.
//!
//! A realization carries the colored component values at grid points and the
//! white-noise increments per step, never white "point values": white noise
//! enters every consumer through integrated increments `DW_k ~ N(0, dt)`,
//! scaled by the square root of the component's white weight.
//!
//! Colored (exponential-decay) components are sampled with the exact AR(1)
//! update of the Ornstein-Uhlenbeck process — no discretization error at any
//! step size: `r_{k+1} = phi r_k + sigma xi_k` with `phi = exp(-a dt)` and
//! `sigma^2 = c (1 - phi^2)`, started from the stationary law `N(0, c)` (or
//! from 0 behind the non-stationary flag). Sums of kernels are sampled as
//! independent processes and added. A dense Cholesky sampler for arbitrary
//! stationary kernels on moderate grids backs validation and the general
//! conditioning path.
//!
//! Draw order within one realization's stream is fixed (white x, white y,
//! colored x terms in declaration order, colored y terms): the numbers a
//! trajectory consumes depend only on the configuration, never on scheduling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use super::grid::{GridError, TimeGrid};
use super::kernel::{exp_terms, white_weight, Component, CorrelationPair};
use crate::linalg::{cholesky_psd, LinalgError, RealSymmetricMatrix};

/// Grid-point cap for dense-covariance sampling and conditioning.
pub const DENSE_POINT_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("dense sampler limited to {cap} grid points, requested {points}")]
    DenseTooLarge { points: usize, cap: usize },
    #[error("covariance factorization failed: {0}")]
    Linalg(#[from] LinalgError),
    #[error("continuation requires a prefix starting at grid index 0, got {start}")]
    PrefixNotAligned { start: usize },
    #[error("continuation end index {end} must exceed the prefix end {prefix_end}")]
    EmptyContinuation { end: usize, prefix_end: usize },
    #[error("statistics validation needs at least 2 realizations, got {0}")]
    TooFewRealizations(usize),
    #[error("{lags} correlation lags need at least {min} grid steps, got {got}")]
    TooFewStepsForLags { lags: usize, min: usize, got: usize },
}

/// Sampled noise on a contiguous index range of the grid.
///
/// Covers grid indices `start_index ..= start_index + steps`. Colored arrays
/// hold component values at those points (zeros when the component has no
/// colored part); white arrays hold the `steps` raw increments `N(0, dt)`.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    pub start_index: usize,
    pub steps: usize,
    pub colored_x: Vec<f64>,
    pub colored_y: Vec<f64>,
    pub white_x: Vec<f64>,
    pub white_y: Vec<f64>,
}

impl NoiseRealization {
    pub fn end_index(&self) -> usize {
        self.start_index + self.steps
    }
}

/// `steps` independent increments with variance `dt`.
pub fn sample_white_increments(steps: usize, dt: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sd = dt.sqrt();
    (0..steps).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Exact Ornstein-Uhlenbeck path for autocovariance `c exp(-a |t-s|)` at
/// `steps + 1` grid points spaced `dt`, starting from the stationary law
/// (or from zero when `stationary_start` is false).
pub fn sample_ou_exact(
    c: f64,
    a: f64,
    steps: usize,
    dt: f64,
    stationary_start: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let phi = (-a * dt).exp();
    let sigma = (c * (1.0 - phi * phi)).max(0.0).sqrt();
    let mut path = Vec::with_capacity(steps + 1);
    let r0 = if stationary_start {
        c.max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    path.push(r0);
    let mut r = r0;
    for _ in 0..steps {
        r = phi * r + sigma * rng.sample::<f64, _>(StandardNormal);
        path.push(r);
    }
    path
}

/// Continue an OU path from a known value at the segment start (exact
/// conditional law of the Markov process given its present value).
pub fn continue_ou_exact(
    c: f64,
    a: f64,
    last_value: f64,
    steps: usize,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let phi = (-a * dt).exp();
    let sigma = (c * (1.0 - phi * phi)).max(0.0).sqrt();
    let mut path = Vec::with_capacity(steps + 1);
    path.push(last_value);
    let mut r = last_value;
    for _ in 0..steps {
        r = phi * r + sigma * rng.sample::<f64, _>(StandardNormal);
        path.push(r);
    }
    path
}

/// Sum of exact AR(1) paths for every colored term of a component
/// (`steps + 1` values; zeros when there is no colored term).
fn sample_component_colored(
    component: &Component,
    steps: usize,
    dt: f64,
    stationary_start: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let terms = exp_terms(component);
    let mut sum = vec![0.0; steps + 1];
    for (c, a) in terms {
        let path = sample_ou_exact(c, a, steps, dt, stationary_start, rng);
        for (s, p) in sum.iter_mut().zip(&path) {
            *s += p;
        }
    }
    sum
}

/// Sample a full-grid realization of the pair.
pub fn sample_realization(
    pair: &CorrelationPair,
    grid: &TimeGrid,
    stationary_start: bool,
    rng: &mut ChaCha8Rng,
) -> NoiseRealization {
    let steps = grid.n_steps();
    let dt = grid.dt();
    let white_x = if white_weight(&pair.x) > 0.0 {
        sample_white_increments(steps, dt, rng)
    } else {
        vec![0.0; steps]
    };
    let white_y = if white_weight(&pair.y) > 0.0 {
        sample_white_increments(steps, dt, rng)
    } else {
        vec![0.0; steps]
    };
    let colored_x = sample_component_colored(&pair.x, steps, dt, stationary_start, rng);
    let colored_y = sample_component_colored(&pair.y, steps, dt, stationary_start, rng);
    NoiseRealization { start_index: 0, steps, colored_x, colored_y, white_x, white_y }
}

/// Dense-Cholesky sampler for the colored part of a component on the full
/// grid: builds `C_ij = smooth(t_i - t_j)`, factors it (PSD with jitter
/// escalation), and applies the factor to standard normals. Exact in law for
/// any stationary smooth kernel; limited to [`DENSE_POINT_CAP`] points.
pub fn sample_general_cholesky(
    component: &Component,
    grid: &TimeGrid,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, NoiseError> {
    let n = grid.n_points();
    if n > DENSE_POINT_CAP {
        return Err(NoiseError::DenseTooLarge { points: n, cap: DENSE_POINT_CAP });
    }
    let dt = grid.dt();
    let cov = RealSymmetricMatrix::from_fn(n, |i, j| {
        super::kernel::smooth_eval(component, (i as f64 - j as f64) * dt)
    });
    let fac = cholesky_psd(&cov)?;
    let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Ok(fac.apply(&z))
}

/// Conditional continuation of a colored component observed at grid points
/// `0..=k` (values `observed`), extended by `extra` points, via the Cholesky
/// form of Gaussian conditioning: factor the full covariance `C = L L^T`,
/// back out the latent normals of the observed block, and draw the suffix
/// from the Schur-complement law `L21 z_obs + L22 z_fresh`.
pub(crate) fn schur_continue_component(
    component: &Component,
    dt: f64,
    observed: &[f64],
    extra: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, NoiseError> {
    let k1 = observed.len(); // observed points
    let m = k1 + extra;
    if m > DENSE_POINT_CAP {
        return Err(NoiseError::DenseTooLarge { points: m, cap: DENSE_POINT_CAP });
    }
    let cov = RealSymmetricMatrix::from_fn(m, |i, j| {
        super::kernel::smooth_eval(component, (i as f64 - j as f64) * dt)
    });
    let fac = cholesky_psd(&cov)?;
    // forward-substitute L11 z = observed; zero pivots (exact rank
    // deficiency) get z = 0, which reproduces the observed block through L21
    let mut z = vec![0.0; k1];
    for i in 0..k1 {
        let mut acc = observed[i];
        for j in 0..i {
            acc -= fac.get(i, j) * z[j];
        }
        let piv = fac.get(i, i);
        z[i] = if piv > 0.0 { acc / piv } else { 0.0 };
    }
    // suffix = L21 z + L22 zeta
    let zeta: Vec<f64> = (0..extra).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut out = Vec::with_capacity(extra + 1);
    out.push(observed[k1 - 1]);
    for r in 0..extra {
        let i = k1 + r;
        let mut acc = 0.0;
        for j in 0..k1 {
            acc += fac.get(i, j) * z[j];
        }
        for j in 0..=r {
            acc += fac.get(i, k1 + j) * zeta[j];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Continue one component past the prefix: fresh white increments are always
/// exact; a single colored term continues with the Markov AR(1) law from its
/// last value; kernel sums condition on the whole observed sum path through
/// the dense Schur-complement sampler.
fn continue_component_colored(
    component: &Component,
    dt: f64,
    observed: &[f64],
    extra: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, NoiseError> {
    let terms = exp_terms(component);
    match terms.len() {
        0 => Ok(vec![0.0; extra + 1]),
        1 => {
            let (c, a) = terms[0];
            Ok(continue_ou_exact(c, a, *observed.last().unwrap(), extra, dt, rng))
        }
        _ => schur_continue_component(component, dt, observed, extra, rng),
    }
}

/// Extend a full-prefix realization (starting at grid index 0) to
/// `end_index`, drawing the suffix from the exact conditional law given the
/// prefix. The returned segment starts at the prefix's last index; its first
/// colored values coincide with the prefix's last values.
pub fn condition_continue(
    pair: &CorrelationPair,
    grid: &TimeGrid,
    prefix: &NoiseRealization,
    end_index: usize,
    rng: &mut ChaCha8Rng,
) -> Result<NoiseRealization, NoiseError> {
    if prefix.start_index != 0 {
        return Err(NoiseError::PrefixNotAligned { start: prefix.start_index });
    }
    let k_s = prefix.end_index();
    if end_index <= k_s {
        return Err(NoiseError::EmptyContinuation { end: end_index, prefix_end: k_s });
    }
    let extra = end_index - k_s;
    let dt = grid.dt();
    let white_x = if white_weight(&pair.x) > 0.0 {
        sample_white_increments(extra, dt, rng)
    } else {
        vec![0.0; extra]
    };
    let white_y = if white_weight(&pair.y) > 0.0 {
        sample_white_increments(extra, dt, rng)
    } else {
        vec![0.0; extra]
    };
    let colored_x = continue_component_colored(&pair.x, dt, &prefix.colored_x, extra, rng)?;
    let colored_y = continue_component_colored(&pair.y, dt, &prefix.colored_y, extra, rng)?;
    Ok(NoiseRealization {
        start_index: k_s,
        steps: extra,
        colored_x,
        colored_y,
        white_x,
        white_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::kernel::Kernel;
    use crate::rng::{substream, StreamPurpose};

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn white_increments_have_variance_dt() {
        let mut rng = substream(7, StreamPurpose::NoiseValidation, 0, 0);
        let dt = 0.01;
        let incs = sample_white_increments(200_000, dt, &mut rng);
        let sq: Vec<f64> = incs.iter().map(|w| w * w).collect();
        let (mean, se) = mean_and_se(&sq);
        assert!((mean - dt).abs() < 5.0 * se, "var {mean} vs dt {dt} (se {se})");
    }

    #[test]
    fn ou_stationary_covariance_matches_kernel() {
        // ensemble of short paths; check Var(r_0) = c and Cov(r_0, r_lag)
        let (c, a, dt) = (1.0, 1.0, 0.01);
        let lag_steps = 100; // lag time 1.0 => covariance c e^{-1}
        let m = 20_000;
        let mut v0 = Vec::with_capacity(m);
        let mut prod = Vec::with_capacity(m);
        for i in 0..m {
            let mut rng = substream(11, StreamPurpose::NoiseValidation, i as u64, 0);
            let path = sample_ou_exact(c, a, lag_steps, dt, true, &mut rng);
            v0.push(path[0] * path[0]);
            prod.push(path[0] * path[lag_steps]);
        }
        let (var0, se0) = mean_and_se(&v0);
        assert!((var0 - c).abs() < 5.0 * se0, "stationary variance {var0} (se {se0})");
        let (cov, sec) = mean_and_se(&prod);
        let want = c * (-a * (lag_steps as f64) * dt).exp();
        assert!((cov - want).abs() < 5.0 * sec, "lag covariance {cov} vs {want} (se {sec})");
    }

    #[test]
    fn nonstationary_start_begins_at_zero() {
        let mut rng = substream(3, StreamPurpose::NoiseValidation, 0, 0);
        let path = sample_ou_exact(2.0, 0.5, 10, 0.1, false, &mut rng);
        assert_eq!(path[0], 0.0);
    }

    #[test]
    fn zero_amplitude_kernel_gives_zero_path() {
        let mut rng = substream(3, StreamPurpose::NoiseValidation, 1, 0);
        let path = sample_ou_exact(0.0, 1.0, 50, 0.1, true, &mut rng);
        assert!(path.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dense_cholesky_sampler_matches_kernel_covariance() {
        let component = vec![Kernel::exp_decay(1.0, 1.0)];
        let grid = TimeGrid::new(0.47, 0.01).unwrap(); // 48 points
        let n = grid.n_points();
        let m = 4000;
        let mut sum = vec![0.0; n * n];
        let mut sumsq = vec![0.0; n * n];
        for i in 0..m {
            let mut rng = substream(13, StreamPurpose::NoiseValidation, i as u64, 0);
            let path = sample_general_cholesky(&component, &grid, &mut rng).unwrap();
            for p in 0..n {
                for q in 0..n {
                    let v = path[p] * path[q];
                    sum[p * n + q] += v;
                    sumsq[p * n + q] += v * v;
                }
            }
        }
        let mf = m as f64;
        for p in 0..n {
            for q in 0..n {
                let mean = sum[p * n + q] / mf;
                let var = (sumsq[p * n + q] / mf - mean * mean).max(0.0);
                let se = (var / mf).sqrt().max(1e-12);
                // a = c = 1: covariance e^{-|t_p - t_q|}
                let want = (-((p as f64 - q as f64) * grid.dt()).abs()).exp();
                assert!(
                    (mean - want).abs() < 5.5 * se,
                    "cov[{p},{q}] = {mean} vs {want} (se {se})"
                );
            }
        }
    }

    #[test]
    fn dense_sampler_rejects_oversized_grids() {
        let component = vec![Kernel::exp_decay(1.0, 1.0)];
        let grid = TimeGrid::new(8.0, 8.0 / 4200.0).unwrap();
        let mut rng = substream(1, StreamPurpose::NoiseValidation, 0, 0);
        assert!(matches!(
            sample_general_cholesky(&component, &grid, &mut rng),
            Err(NoiseError::DenseTooLarge { .. })
        ));
    }

    #[test]
    fn ar1_continuation_matches_conditional_law() {
        let (c, a, dt) = (1.0, 1.0, 0.01);
        let pair = CorrelationPair::new(vec![Kernel::exp_decay(c, a)], vec![]);
        let grid = TimeGrid::new(2.0, dt).unwrap();
        let mut prefix_rng = substream(17, StreamPurpose::BranchPrefix, 0, 0);
        let prefix = {
            let mut r = sample_realization(&pair, &grid, true, &mut prefix_rng);
            r.colored_x.truncate(51);
            r.white_x.truncate(50);
            r.white_y.truncate(50);
            r.colored_y.truncate(51);
            r.steps = 50;
            r
        };
        let x_s = *prefix.colored_x.last().unwrap();
        let tau_steps = 80;
        let tau = tau_steps as f64 * dt;
        let m = 20_000;
        let mut finals = Vec::with_capacity(m);
        for i in 0..m {
            let mut rng = substream(17, StreamPurpose::BranchContinuation, 0, i as u64);
            let seg = condition_continue(&pair, &grid, &prefix, 50 + tau_steps, &mut rng).unwrap();
            assert_eq!(seg.start_index, 50);
            assert_eq!(seg.colored_x[0], x_s);
            finals.push(seg.colored_x[tau_steps]);
        }
        let (mean, se) = mean_and_se(&finals);
        let want_mean = x_s * (-a * tau).exp();
        assert!((mean - want_mean).abs() < 5.0 * se, "cond mean {mean} vs {want_mean}");
        let devs: Vec<f64> = finals.iter().map(|v| (v - want_mean) * (v - want_mean)).collect();
        let (var, sev) = mean_and_se(&devs);
        let want_var = c * (1.0 - (-2.0 * a * tau).exp());
        assert!((var - want_var).abs() < 5.0 * sev, "cond var {var} vs {want_var}");
    }

    #[test]
    fn schur_continuation_agrees_with_markov_law_for_single_kernel() {
        // conditioning on the whole path of a Markov process must reduce to
        // conditioning on its last value
        let (c, a, dt) = (0.8, 2.0, 0.02);
        let component = vec![Kernel::exp_decay(c, a)];
        let mut prefix_rng = substream(23, StreamPurpose::BranchPrefix, 0, 0);
        let observed = sample_ou_exact(c, a, 40, dt, true, &mut prefix_rng);
        let x_s = *observed.last().unwrap();
        let extra = 30;
        let tau = extra as f64 * dt;
        let m = 20_000;
        let mut finals = Vec::with_capacity(m);
        for i in 0..m {
            let mut rng = substream(23, StreamPurpose::BranchContinuation, 1, i as u64);
            let seg = schur_continue_component(&component, dt, &observed, extra, &mut rng).unwrap();
            finals.push(seg[extra]);
        }
        let (mean, se) = mean_and_se(&finals);
        let want_mean = x_s * (-a * tau).exp();
        assert!((mean - want_mean).abs() < 5.0 * se.max(1e-6), "{mean} vs {want_mean}");
        let devs: Vec<f64> = finals.iter().map(|v| (v - want_mean) * (v - want_mean)).collect();
        let (var, sev) = mean_and_se(&devs);
        let want_var = c * (1.0 - (-2.0 * a * tau).exp());
        assert!((var - want_var).abs() < 5.0 * sev, "{var} vs {want_var}");
    }

    #[test]
    fn two_kernel_sum_continuation_preserves_the_stationary_law() {
        // law of total covariance: prefix + conditioned suffix glued together
        // must reproduce the summed-kernel covariance
        let component = vec![Kernel::exp_decay(0.5, 1.0), Kernel::exp_decay(0.5, 4.0)];
        let pair = CorrelationPair::new(component.clone(), vec![]);
        let grid = TimeGrid::new(1.0, 0.02).unwrap();
        let (k_s, end) = (25usize, 50usize);
        let m = 20_000;
        let mut p_at = Vec::with_capacity(m); // value before the branch point
        let mut f_at = Vec::with_capacity(m); // value after it
        for i in 0..m {
            let mut rng = substream(29, StreamPurpose::BranchPrefix, i as u64, 0);
            let mut prefix = sample_realization(&pair, &grid, true, &mut rng);
            prefix.colored_x.truncate(k_s + 1);
            prefix.colored_y.truncate(k_s + 1);
            prefix.white_x.truncate(k_s);
            prefix.white_y.truncate(k_s);
            prefix.steps = k_s;
            let mut crng = substream(29, StreamPurpose::BranchContinuation, i as u64, 0);
            let seg = condition_continue(&pair, &grid, &prefix, end, &mut crng).unwrap();
            p_at.push(prefix.colored_x[10]);
            f_at.push(seg.colored_x[seg.steps]);
        }
        let prods: Vec<f64> = p_at.iter().zip(&f_at).map(|(p, f)| p * f).collect();
        let (cov, se) = mean_and_se(&prods);
        let lag = (end - 10) as f64 * grid.dt();
        let want = 0.5 * (-lag).exp() + 0.5 * (-4.0 * lag).exp();
        assert!((cov - want).abs() < 5.0 * se, "glued covariance {cov} vs {want} (se {se})");
    }

    #[test]
    fn realizations_are_reproducible() {
        let pair = CorrelationPair::new(
            vec![Kernel::white(0.5)],
            vec![Kernel::exp_decay(1.0, 1.0)],
        );
        let grid = TimeGrid::new(1.0, 0.01).unwrap();
        let r1 = sample_realization(&pair, &grid, true, &mut substream(5, StreamPurpose::Trajectory, 9, 0));
        let r2 = sample_realization(&pair, &grid, true, &mut substream(5, StreamPurpose::Trajectory, 9, 0));
        assert_eq!(r1.white_x, r2.white_x);
        assert_eq!(r1.colored_y, r2.colored_y);
    }
}
