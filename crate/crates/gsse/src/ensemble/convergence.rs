//! Weak-convergence studies for the three integrators.
//!
//! The Ito stepper is tested against itself on a common colored-noise
//! refinement: every level subsamples one fine realization at shared grid
//! points, the white component is integrated out exactly through the
//! stepper's conditional second-moment recursion, and each level difference
//! is averaged with its sign-flipped antithetic partner. Marginalization and
//! pairing together remove nearly all coupling variance, so the weak bias is
//! resolvable at modest ensemble sizes. The Heun stepper is tested per realization against the
//! exact dephasing propagator on the same subsampled noise. The exact
//! propagator, having no step bias at all, is checked for consistency
//! between two step sizes.

use rayon::prelude::*;

use crate::linalg::{ComplexMatrix, C64};
use crate::noise::{sample_realization, CorrelationPair, NoiseRealization, TimeGrid};
use crate::rng::{substream, StreamPurpose};
use crate::sse::{propagate_segment, Engine, IntegratorKind, ModelSpec, Scratch, SseError};

use super::run::effective_workers;
use super::{ConfigError, EnsembleError, ExperimentConfig};

/// Acceptance window for the fitted weak order of the Ito stepper.
pub const EM_ORDER_WINDOW: (f64, f64) = (0.7, 1.3);

/// Acceptance window for the fitted per-realization order of the Heun
/// stepper against the exact propagator.
pub const HEUN_ORDER_WINDOW: (f64, f64) = (1.7, 2.3);

/// The exact propagator must agree with itself across step sizes within this
/// many combined standard errors.
pub const EXACT_CONSISTENCY_Z_MAX: f64 = 2.0;

/// The common refinement runs this many times finer than the finest level.
const REFINEMENT: usize = 8;

/// One step-size level of the study. For the order fits `value` is the
/// weak-error magnitude at that level (`|mean difference|` against the common
/// refinement, or the mean per-realization state error against the exact
/// propagator); for the exact-consistency mode it is the raw observable mean.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub integrator: IntegratorKind,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log error against log step size; absent in the
    /// exact-consistency mode.
    pub fitted_order: Option<f64>,
    /// Two-level agreement z-score; present only in the exact-consistency
    /// mode.
    pub consistency_z: Option<f64>,
    pub pass: bool,
}

/// Global sign flip of a realization. The joint law of the colored values
/// and white increments is centered Gaussian, hence symmetric, so averaging
/// an estimator over a realization and its flip leaves every expectation
/// unchanged while cancelling the parts of the coupled level difference that
/// are odd in the noise — the dominant source of its variance.
fn negated(seg: &NoiseRealization) -> NoiseRealization {
    NoiseRealization {
        start_index: seg.start_index,
        steps: seg.steps,
        colored_x: seg.colored_x.iter().map(|v| -v).collect(),
        colored_y: seg.colored_y.iter().map(|v| -v).collect(),
        white_x: seg.white_x.iter().map(|v| -v).collect(),
        white_y: seg.white_y.iter().map(|v| -v).collect(),
    }
}

/// Subsample a fine realization onto a grid `ratio` times coarser: colored
/// values at shared points, white increments summed over groups (the law of
/// the coarse increments is exactly the coarse-grid law).
fn coarsen(fine: &NoiseRealization, ratio: usize) -> NoiseRealization {
    debug_assert_eq!(fine.start_index, 0);
    debug_assert_eq!(fine.steps % ratio, 0);
    let steps = fine.steps / ratio;
    NoiseRealization {
        start_index: 0,
        steps,
        colored_x: (0..=steps).map(|k| fine.colored_x[k * ratio]).collect(),
        colored_y: (0..=steps).map(|k| fine.colored_y[k * ratio]).collect(),
        white_x: (0..steps)
            .map(|k| fine.white_x[k * ratio..(k + 1) * ratio].iter().sum())
            .collect(),
        white_y: (0..steps)
            .map(|k| fine.white_y[k * ratio..(k + 1) * ratio].iter().sum())
            .collect(),
    }
}

fn terminal_state(
    engine: &Engine,
    model: &ModelSpec,
    grid: &TimeGrid,
    seg: &NoiseRealization,
    scratch: &mut Scratch,
) -> Result<Vec<num_complex::Complex64>, SseError> {
    let mut psi = model.psi0.amps.clone();
    propagate_segment(engine, &mut psi, grid, seg, scratch, |_, _, _| {})?;
    Ok(psi)
}

fn norm_sq(psi: &[num_complex::Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Descending, distinct, horizon-commensurate levels.
fn checked_levels(
    cfg: &ExperimentConfig,
    dt_levels: &[f64],
    min_count: usize,
) -> Result<Vec<(f64, TimeGrid)>, ConfigError> {
    if dt_levels.len() < min_count {
        return Err(ConfigError::TooFewDtLevels { min: min_count, got: dt_levels.len() });
    }
    let mut sorted = dt_levels.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite dt levels"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ConfigError::BadDtLevels { detail: "duplicate level".into() });
    }
    sorted
        .into_iter()
        .map(|dt| {
            TimeGrid::new(cfg.grid.t_max(), dt)
                .map(|grid| (dt, grid))
                .map_err(|e| ConfigError::BadDtLevels { detail: e.to_string() })
        })
        .collect()
}

fn refinement_ratios(
    levels: &[(f64, TimeGrid)],
    dt_ref: f64,
) -> Result<Vec<usize>, ConfigError> {
    levels
        .iter()
        .map(|&(dt, _)| {
            let ratio = (dt / dt_ref).round();
            if ((ratio * dt_ref - dt) / dt).abs() > 1e-9 {
                return Err(ConfigError::BadDtLevels {
                    detail: format!(
                        "level {dt} is not an integer multiple of the refinement step {dt_ref}"
                    ),
                });
            }
            Ok(ratio as usize)
        })
        .collect()
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

struct LevelSums {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    n: usize,
}

impl LevelSums {
    fn new(levels: usize) -> Self {
        Self { sum: vec![0.0; levels], sum_sq: vec![0.0; levels], n: 0 }
    }
    fn add(&mut self, values: &[f64]) {
        self.n += 1;
        for (k, v) in values.iter().enumerate() {
            self.sum[k] += v;
            self.sum_sq[k] += v * v;
        }
    }
    fn merge(mut self, other: Self) -> Self {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }
    fn mean_se(&self, k: usize) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum[k] / n;
        let var = ((self.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Run `per_trajectory` in index blocks under a deterministic parallel
/// reduction (same contract as the ensemble runner).
fn parallel_level_sums<F>(
    cfg: &ExperimentConfig,
    n: usize,
    n_levels: usize,
    per_trajectory: F,
) -> Result<LevelSums, EnsembleError>
where
    F: Fn(usize, &mut Vec<f64>) -> Result<(), EnsembleError> + Sync,
{
    const BLOCK: usize = 32;
    let n_blocks = n.div_ceil(BLOCK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_workers(cfg.workers))
        .build()
        .map_err(|e| EnsembleError::Pool(e.to_string()))?;
    let blocks: Result<Vec<LevelSums>, EnsembleError> = pool.install(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let mut sums = LevelSums::new(n_levels);
                let mut values = vec![0.0; n_levels];
                for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                    per_trajectory(i, &mut values)?;
                    sums.add(&values);
                }
                Ok(sums)
            })
            .collect()
    });
    let mut blocks = blocks?;
    // fixed pairwise tree, as in the ensemble runner
    while blocks.len() > 1 {
        let mut next = Vec::with_capacity(blocks.len().div_ceil(2));
        let mut it = blocks.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.merge(b)),
                None => next.push(a),
            }
        }
        blocks = next;
    }
    Ok(blocks.pop().expect("nonempty"))
}

/// Exact white-noise marginal of the Ito chain's terminal squared norm.
///
/// Conditioned on the colored component, every step of the Ito stepper is
/// linear in the state with an independent centered Gaussian increment, so
/// the conditional second moment `S_k = E[psi_k psi_k^dag | y]` obeys the
/// deterministic recursion
/// `S' = D S D^dag + (kappa/2) dt L S L^dag` with
/// `D = I + dt (-iH - (kappa/4) L^2 - i y_k L)`, and the conditional mean of
/// the terminal squared norm is `tr S_N`. Averaging the recursion over
/// colored paths reproduces the plain Monte Carlo mean exactly while
/// discarding all white-noise sampling variance; only this marginalization
/// makes the O(dt) weak bias stand out of the coupling noise at modest
/// ensemble sizes.
struct WhiteMarginal {
    base: ComplexMatrix,
    minus_i_dt_l: ComplexMatrix,
    l: ComplexMatrix,
    l_adj: ComplexMatrix,
    half_kappa_dt: f64,
}

impl WhiteMarginal {
    fn new(model: &ModelSpec, pair: &CorrelationPair, dt: f64) -> Self {
        let kappa = pair.kappa();
        let l_sq = model.l.matmul(&model.l);
        let drift = model
            .h
            .scale(C64::new(0.0, -1.0))
            .add(&l_sq.scale(C64::new(-kappa / 4.0, 0.0)));
        Self {
            base: ComplexMatrix::identity(model.dim).add(&drift.scale(C64::new(dt, 0.0))),
            minus_i_dt_l: model.l.scale(C64::new(0.0, -dt)),
            l: model.l.clone(),
            l_adj: model.l.conj_transpose(),
            half_kappa_dt: 0.5 * kappa * dt,
        }
    }

    fn terminal_mean_norm_sq(&self, psi0: &crate::linalg::StateVector, seg: &NoiseRealization) -> f64 {
        let mut s = psi0.outer();
        for k in 0..seg.steps {
            let d = self.base.add(&self.minus_i_dt_l.scale(C64::new(seg.colored_y[k], 0.0)));
            let kick = self.l.matmul(&s).matmul(&self.l_adj);
            s = d
                .matmul(&s)
                .matmul(&d.conj_transpose())
                .add(&kick.scale(C64::new(self.half_kappa_dt, 0.0)));
        }
        s.trace().re
    }
}

fn em_weak_order_study(
    cfg: &ExperimentConfig,
    dt_levels: &[f64],
    n: usize,
) -> Result<ConvergenceReport, EnsembleError> {
    let levels = checked_levels(cfg, dt_levels, 3)?;
    let dt_min = levels.last().expect("nonempty").0;
    let dt_ref = dt_min / REFINEMENT as f64;
    let grid_ref = TimeGrid::new(cfg.grid.t_max(), dt_ref)
        .map_err(|e| ConfigError::BadDtLevels { detail: e.to_string() })?;
    let ratios = refinement_ratios(&levels, dt_ref)?;
    // prepared only to certify the (model, pair) combination for this stepper
    Engine::prepare(&cfg.model, &cfg.pair, cfg.integrator)?;
    let marginal_ref = WhiteMarginal::new(&cfg.model, &cfg.pair, dt_ref);
    let marginals: Vec<WhiteMarginal> =
        levels.iter().map(|&(dt, _)| WhiteMarginal::new(&cfg.model, &cfg.pair, dt)).collect();

    let sums = parallel_level_sums(cfg, n, levels.len(), |i, values| {
        let mut rng = substream(cfg.master_seed, StreamPurpose::Convergence, i as u64, 0);
        let fine = sample_realization(&cfg.pair, &grid_ref, true, &mut rng);
        let anti = negated(&fine);
        values.iter_mut().for_each(|v| *v = 0.0);
        // the sign-flipped partner still cancels the odd-in-y part of the
        // colored subsampling error
        for fine in [&fine, &anti] {
            let f_ref = marginal_ref.terminal_mean_norm_sq(&cfg.model.psi0, fine);
            for (k, (marginal, &ratio)) in marginals.iter().zip(&ratios).enumerate() {
                let seg = coarsen(fine, ratio);
                let f_k = marginal.terminal_mean_norm_sq(&cfg.model.psi0, &seg);
                values[k] += 0.5 * (f_k - f_ref);
            }
        }
        Ok(())
    })?;

    let rows: Vec<ConvergenceRow> = levels
        .iter()
        .enumerate()
        .map(|(k, &(dt, _))| {
            let (mean, se) = sums.mean_se(k);
            ConvergenceRow { dt, value: mean.abs(), se }
        })
        .collect();
    // the reference shares the leading bias term, so the observed difference
    // scales with (dt - dt_ref), which is the honest abscissa for the fit
    let xs: Vec<f64> = rows.iter().map(|r| (r.dt - dt_ref).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.max(f64::MIN_POSITIVE).ln()).collect();
    let order = least_squares_slope(&xs, &ys);
    Ok(ConvergenceReport {
        integrator: cfg.integrator,
        rows,
        fitted_order: Some(order),
        consistency_z: None,
        pass: order >= EM_ORDER_WINDOW.0 && order <= EM_ORDER_WINDOW.1,
    })
}

fn heun_vs_exact_study(
    cfg: &ExperimentConfig,
    dt_levels: &[f64],
    n: usize,
) -> Result<ConvergenceReport, EnsembleError> {
    let levels = checked_levels(cfg, dt_levels, 3)?;
    let dt_min = levels.last().expect("nonempty").0;
    let dt_ref = dt_min / REFINEMENT as f64;
    let grid_ref = TimeGrid::new(cfg.grid.t_max(), dt_ref)
        .map_err(|e| ConfigError::BadDtLevels { detail: e.to_string() })?;
    let ratios = refinement_ratios(&levels, dt_ref)?;
    let heun = Engine::prepare(&cfg.model, &cfg.pair, IntegratorKind::HeunStrat)?;
    // the model must admit the exact propagator; its preparation reports the
    // precise obstruction otherwise
    let exact = Engine::prepare(&cfg.model, &cfg.pair, IntegratorKind::DephasingExact)
        .map_err(ConfigError::Integrator)?;

    let sums = parallel_level_sums(cfg, n, levels.len(), |i, values| {
        let mut rng = substream(cfg.master_seed, StreamPurpose::Convergence, i as u64, 0);
        let fine = sample_realization(&cfg.pair, &grid_ref, true, &mut rng);
        let mut scratch = Scratch::new(cfg.model.dim);
        for (k, ((_, grid), &ratio)) in levels.iter().zip(&ratios).enumerate() {
            let seg = coarsen(&fine, ratio);
            let psi_h = terminal_state(&heun, &cfg.model, grid, &seg, &mut scratch)?;
            let psi_e = terminal_state(&exact, &cfg.model, grid, &seg, &mut scratch)?;
            values[k] = psi_h
                .iter()
                .zip(&psi_e)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
        }
        Ok(())
    })?;

    let rows: Vec<ConvergenceRow> = levels
        .iter()
        .enumerate()
        .map(|(k, &(dt, _))| {
            let (mean, se) = sums.mean_se(k);
            ConvergenceRow { dt, value: mean, se }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.max(f64::MIN_POSITIVE).ln()).collect();
    let order = least_squares_slope(&xs, &ys);
    Ok(ConvergenceReport {
        integrator: cfg.integrator,
        rows,
        fitted_order: Some(order),
        consistency_z: None,
        pass: order >= HEUN_ORDER_WINDOW.0 && order <= HEUN_ORDER_WINDOW.1,
    })
}

fn exact_consistency_study(
    cfg: &ExperimentConfig,
    dt_levels: &[f64],
    n: usize,
) -> Result<ConvergenceReport, EnsembleError> {
    let levels = checked_levels(cfg, dt_levels, 2)?;
    if levels.len() != 2 {
        return Err(ConfigError::BadDtLevels {
            detail: format!(
                "exact-propagator consistency compares exactly two step sizes, got {}",
                levels.len()
            ),
        }
        .into());
    }
    let engine = Engine::prepare(&cfg.model, &cfg.pair, cfg.integrator)?;

    // ensembles at the two step sizes are independent (separate substream
    // counters); the statistic is the difference of their observable means
    let sums = parallel_level_sums(cfg, n, 2, |i, values| {
        let mut scratch = Scratch::new(cfg.model.dim);
        for (k, (_, grid)) in levels.iter().enumerate() {
            let mut rng =
                substream(cfg.master_seed, StreamPurpose::Convergence, i as u64, 1 + k as u64);
            let seg = sample_realization(&cfg.pair, grid, true, &mut rng);
            values[k] = norm_sq(&terminal_state(&engine, &cfg.model, grid, &seg, &mut scratch)?);
        }
        Ok(())
    })?;

    let rows: Vec<ConvergenceRow> = levels
        .iter()
        .enumerate()
        .map(|(k, &(dt, _))| {
            let (mean, se) = sums.mean_se(k);
            ConvergenceRow { dt, value: mean, se }
        })
        .collect();
    let combined_se = (rows[0].se.powi(2) + rows[1].se.powi(2)).sqrt();
    let z = (rows[0].value - rows[1].value) / combined_se.max(f64::MIN_POSITIVE);
    Ok(ConvergenceReport {
        integrator: cfg.integrator,
        rows,
        fitted_order: None,
        consistency_z: Some(z),
        pass: z.abs() <= EXACT_CONSISTENCY_Z_MAX,
    })
}

/// Weak-convergence study for `cfg.integrator` across `dt_levels`, with `n`
/// trajectories per level. Dispatches on the integrator: coupled
/// self-refinement (Ito stepper), per-realization comparison against the
/// exact propagator (Heun), or two-level consistency (exact propagator).
pub fn convergence_study(
    cfg: &ExperimentConfig,
    dt_levels: &[f64],
    n: usize,
) -> Result<ConvergenceReport, EnsembleError> {
    cfg.validate()?;
    if n < 2 {
        return Err(ConfigError::TooFewTrajectories(n).into());
    }
    match cfg.integrator {
        IntegratorKind::EmIto => em_weak_order_study(cfg, dt_levels, n),
        IntegratorKind::HeunStrat => heun_vs_exact_study(cfg, dt_levels, n),
        IntegratorKind::DephasingExact => exact_consistency_study(cfg, dt_levels, n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{CorrelationPair, Kernel};

    fn config(
        model: ModelSpec,
        pair: CorrelationPair,
        integrator: IntegratorKind,
        seed: u64,
    ) -> ExperimentConfig {
        ExperimentConfig {
            model,
            pair,
            grid: TimeGrid::new(1.0, 1e-3).unwrap(),
            n_trajectories: 2,
            master_seed: seed,
            integrator,
            n_snapshots: 1,
            branching: None,
            workers: Some(2),
        }
    }

    #[test]
    fn coarsen_preserves_colored_points_and_white_sums() {
        let fine = NoiseRealization {
            start_index: 0,
            steps: 8,
            colored_x: (0..=8).map(|k| k as f64).collect(),
            colored_y: vec![0.0; 9],
            white_x: vec![1.0; 8],
            white_y: vec![0.5; 8],
        };
        let coarse = coarsen(&fine, 4);
        assert_eq!(coarse.steps, 2);
        assert_eq!(coarse.colored_x, vec![0.0, 4.0, 8.0]);
        assert_eq!(coarse.white_x, vec![4.0, 4.0]);
        assert_eq!(coarse.white_y, vec![2.0, 2.0]);
    }

    #[test]
    fn white_marginal_matches_brute_force_white_sampling() {
        // fixed colored path, many white paths through the actual stepper
        let model = ModelSpec::spin_boson(1.0, 1.0).unwrap();
        let pair =
            CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::exp_decay(1.0, 1.0)]);
        let grid = TimeGrid::new(0.2, 0.02).unwrap();
        let engine = Engine::prepare(&model, &pair, IntegratorKind::EmIto).unwrap();
        let mut rng = substream(7, StreamPurpose::Convergence, 0, 0);
        let colored = sample_realization(&pair, &grid, true, &mut rng);

        let n = 40_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut scratch = Scratch::new(model.dim);
        for i in 1..=n {
            let mut rng = substream(7, StreamPurpose::Convergence, i as u64, 0);
            let mut seg = sample_realization(&pair, &grid, true, &mut rng);
            seg.colored_y.copy_from_slice(&colored.colored_y);
            let f = norm_sq(&terminal_state(&engine, &model, &grid, &seg, &mut scratch).unwrap());
            sum += f;
            sum_sq += f * f;
        }
        let mean = sum / n as f64;
        let se = (((sum_sq - sum * sum / n as f64) / (n as f64 - 1.0)) / n as f64).sqrt();

        let marginal = WhiteMarginal::new(&model, &pair, grid.dt());
        let predicted = marginal.terminal_mean_norm_sq(&model.psi0, &colored);
        let z = (mean - predicted) / se;
        assert!(z.abs() < 4.0, "marginal {predicted:.6} vs sampled {mean:.6} (z = {z:.2})");
    }

    #[test]
    fn em_weak_order_near_one() {
        let cfg = config(
            ModelSpec::spin_boson(1.0, 1.0).unwrap(),
            CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::exp_decay(1.0, 1.0)]),
            IntegratorKind::EmIto,
            414,
        );
        let report = convergence_study(&cfg, &[8e-3, 4e-3, 2e-3], 400).unwrap();
        let order = report.fitted_order.unwrap();
        assert!(
            report.pass,
            "fitted order {order:.3}, rows: {:?}",
            report.rows.iter().map(|r| (r.dt, r.value, r.se)).collect::<Vec<_>>()
        );
        // the signal must be resolved, not a fit through noise
        for row in &report.rows {
            assert!(row.value > 3.0 * row.se, "dt {}: error {:.2e} vs se {:.2e}", row.dt, row.value, row.se);
        }
    }

    #[test]
    fn heun_order_near_two_against_exact() {
        let cfg = config(
            ModelSpec::dephasing(1.0, 1.0).unwrap(),
            CorrelationPair::new(
                vec![Kernel::exp_decay(1.0, 1.0)],
                vec![Kernel::exp_decay(0.5, 2.0)],
            ),
            IntegratorKind::HeunStrat,
            6,
        );
        let report = convergence_study(&cfg, &[8e-3, 4e-3, 2e-3], 160).unwrap();
        let order = report.fitted_order.unwrap();
        assert!(report.pass, "fitted order {order:.3}");
        // halving dt should quarter the error, level by level
        let r = &report.rows;
        for w in r.windows(2) {
            let ratio = w[0].value / w[1].value;
            assert!((3.2..5.0).contains(&ratio), "error ratio {ratio:.2}");
        }
    }

    #[test]
    fn exact_propagator_consistent_across_two_step_sizes() {
        let cfg = config(
            ModelSpec::dephasing(1.0, 1.0).unwrap(),
            CorrelationPair::new(
                vec![Kernel::exp_decay(1.0, 1.0)],
                vec![Kernel::exp_decay(1.0, 1.0)],
            ),
            IntegratorKind::DephasingExact,
            99,
        );
        let report = convergence_study(&cfg, &[2e-3, 1e-3], 1500).unwrap();
        let z = report.consistency_z.unwrap();
        assert!(report.pass, "consistency z = {z:.2}");
        assert!(report.fitted_order.is_none());
    }

    #[test]
    fn rejects_bad_levels() {
        let cfg = config(
            ModelSpec::spin_boson(1.0, 1.0).unwrap(),
            CorrelationPair::new(vec![Kernel::white(0.5)], vec![]),
            IntegratorKind::EmIto,
            1,
        );
        assert!(matches!(
            convergence_study(&cfg, &[4e-3, 2e-3], 100),
            Err(EnsembleError::Config(ConfigError::TooFewDtLevels { .. }))
        ));
        assert!(matches!(
            convergence_study(&cfg, &[4e-3, 4e-3, 2e-3], 100),
            Err(EnsembleError::Config(ConfigError::BadDtLevels { .. }))
        ));
        assert!(matches!(
            convergence_study(&cfg, &[4e-3, 2e-3, 1.5e-3, 3e-4], 100),
            Err(EnsembleError::Config(ConfigError::BadDtLevels { .. }))
        ));
    }
}
