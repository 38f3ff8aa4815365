//! Trajectory ensemble runner with deterministic parallel reduction.
//!
//! Work is split into fixed-size blocks of consecutive trajectory indices.
//! Each block folds its trajectories into a private accumulator in index
//! order; block accumulators are merged along a pairwise binary tree fixed by
//! block index. Neither step depends on scheduling, so results are
//! bit-identical for a fixed master seed under any worker count.

use rayon::prelude::*;

use crate::linalg::{ComplexMatrix, C64};
use crate::noise::sample_realization;
use crate::oracles::{MasterResidualAccumulator, MasterResidualReport};
use crate::rng::{substream, StreamPurpose};
use crate::sse::{run_trajectory, Engine, SseError, TrajectoryResult};

use super::{EnsembleError, ExperimentConfig};

/// Environment variable consulted for the worker count when the config does
/// not fix one; a `--workers` flag (or explicit config value) takes
/// precedence, and machine parallelism is the fallback.
pub const WORKERS_ENV: &str = "GSSE_WORKERS";

/// Runs abort once more than this fraction of trajectories overflows.
pub const MAX_ABORT_FRACTION: f64 = 0.01;

/// Trajectories per sequential block; fixed so the reduction shape never
/// depends on the worker count.
const BLOCK_SIZE: usize = 64;

/// Resolve the worker count: explicit request, then the `GSSE_WORKERS`
/// environment variable, then machine parallelism.
pub fn effective_workers(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Monte Carlo summary of one ensemble at the snapshot times.
///
/// `rho` holds the trace-normalized averaged projectors; `raw_trace` records
/// the trace of the unnormalized average (its mean is exactly
/// `mean_norm_sq`). Entry standard errors refer to the raw averaged entries;
/// for accepted configurations the raw trace stays near 1, so they also
/// calibrate the normalized matrices to first order.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean_norm_sq: Vec<f64>,
    pub se_norm_sq: Vec<f64>,
    pub rho: Vec<ComplexMatrix>,
    pub raw_trace: Vec<f64>,
    /// Standard error of each raw averaged real part, row-major, per time.
    pub rho_se_re: Vec<Vec<f64>>,
    /// Standard error of each raw averaged imaginary part, row-major.
    pub rho_se_im: Vec<Vec<f64>>,
    /// Effective sample size under squared-norm weighting,
    /// `(Σw)² / Σw²`; equals the trajectory count when all weights agree.
    pub ess: Vec<f64>,
    pub n_completed: usize,
    pub n_aborted: usize,
}

impl EnsembleStats {
    pub fn dim(&self) -> usize {
        self.rho.first().map_or(0, |m| m.rows())
    }

    /// One-sigma trace-distance radius of the Monte Carlo error at snapshot
    /// `j`: trace distance obeys T(a, b) <= (sqrt(d)/2) ||a - b||_F, and the
    /// Frobenius radius of the estimator is the root sum of squared entry
    /// standard errors.
    pub fn trace_distance_envelope(&self, j: usize) -> f64 {
        let d = self.dim() as f64;
        let sum_sq: f64 = self.rho_se_re[j]
            .iter()
            .chain(self.rho_se_im[j].iter())
            .map(|se| se * se)
            .sum();
        0.5 * d.sqrt() * sum_sq.sqrt()
    }
}

/// Per-block online sums. Merging adds fields entrywise, so any merge tree
/// yields the same totals up to float associativity; the fixed tree in
/// `tree_reduce` pins one bracketing.
struct Accum {
    count: usize,
    aborted: usize,
    sum_norm: Vec<f64>,
    sum_norm_sq: Vec<f64>,
    sum_outer: Vec<ComplexMatrix>,
    sum_outer_sq_re: Vec<Vec<f64>>,
    sum_outer_sq_im: Vec<Vec<f64>>,
    residual: Option<MasterResidualAccumulator>,
}

impl Accum {
    fn new(dim: usize, n_snapshots: usize, residual: Option<MasterResidualAccumulator>) -> Self {
        let points = n_snapshots + 1;
        Self {
            count: 0,
            aborted: 0,
            sum_norm: vec![0.0; points],
            sum_norm_sq: vec![0.0; points],
            sum_outer: vec![ComplexMatrix::zeros(dim, dim); points],
            sum_outer_sq_re: vec![vec![0.0; dim * dim]; points],
            sum_outer_sq_im: vec![vec![0.0; dim * dim]; points],
            residual,
        }
    }

    fn add(&mut self, tr: &TrajectoryResult) {
        self.count += 1;
        for (j, &idx) in tr.snapshot_indices.iter().enumerate() {
            let w = tr.norms_sq[idx];
            self.sum_norm[j] += w;
            self.sum_norm_sq[j] += w * w;
            let outer = tr.states[j].outer();
            for (e, v) in outer.data().iter().enumerate() {
                self.sum_outer_sq_re[j][e] += v.re * v.re;
                self.sum_outer_sq_im[j][e] += v.im * v.im;
            }
            self.sum_outer[j] = self.sum_outer[j].add(&outer);
        }
        if let Some(acc) = &mut self.residual {
            acc.add_trajectory(&tr.states);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.aborted += other.aborted;
        for (a, b) in self.sum_norm.iter_mut().zip(&other.sum_norm) {
            *a += b;
        }
        for (a, b) in self.sum_norm_sq.iter_mut().zip(&other.sum_norm_sq) {
            *a += b;
        }
        for (a, b) in self.sum_outer.iter_mut().zip(&other.sum_outer) {
            *a = a.add(b);
        }
        for (a, b) in self.sum_outer_sq_re.iter_mut().zip(&other.sum_outer_sq_re) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.sum_outer_sq_im.iter_mut().zip(&other.sum_outer_sq_im) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.residual = match (self.residual, other.residual) {
            (Some(a), Some(b)) => Some(a.merge(b)),
            (a, None) => a,
            (None, b) => b,
        };
        self
    }
}

/// Merge accumulators pairwise by index until one remains. The bracketing
/// depends only on the number of blocks, which is fixed by the trajectory
/// count — this is the determinism contract, not an optimization.
fn tree_reduce(mut level: Vec<Accum>) -> Accum {
    debug_assert!(!level.is_empty());
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.merge(b)),
                None => next.push(a),
            }
        }
        level = next;
    }
    level.pop().expect("nonempty reduction")
}

fn snapshot_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let stride = cfg.grid.n_steps() / cfg.n_snapshots;
    (0..=cfg.n_snapshots).map(|j| cfg.grid.time(j * stride)).collect()
}

fn run_blocks(
    cfg: &ExperimentConfig,
    engine: &Engine,
    residual_proto: Option<&MasterResidualAccumulator>,
) -> Result<Accum, EnsembleError> {
    let n = cfg.n_trajectories;
    let n_blocks = n.div_ceil(BLOCK_SIZE);
    let workers = effective_workers(cfg.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EnsembleError::Pool(e.to_string()))?;
    let blocks: Result<Vec<Accum>, EnsembleError> = pool.install(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK_SIZE;
                let hi = ((b + 1) * BLOCK_SIZE).min(n);
                let mut acc =
                    Accum::new(cfg.model.dim, cfg.n_snapshots, residual_proto.cloned());
                for i in lo..hi {
                    let mut rng =
                        substream(cfg.master_seed, StreamPurpose::Trajectory, i as u64, 0);
                    let realization = sample_realization(&cfg.pair, &cfg.grid, true, &mut rng);
                    match run_trajectory(engine, &cfg.model, &cfg.grid, &realization, cfg.n_snapshots)
                    {
                        Ok(tr) => acc.add(&tr),
                        Err(SseError::Overflow { .. }) => acc.aborted += 1,
                        Err(e) => return Err(e.into()),
                    }
                }
                Ok(acc)
            })
            .collect()
    });
    Ok(tree_reduce(blocks?))
}

fn finalize(cfg: &ExperimentConfig, acc: &Accum) -> Result<EnsembleStats, EnsembleError> {
    let total = cfg.n_trajectories;
    if acc.aborted as f64 > MAX_ABORT_FRACTION * total as f64 {
        return Err(EnsembleError::TooManyAborts { aborted: acc.aborted, total });
    }
    let n = acc.count;
    debug_assert_eq!(n + acc.aborted, total);
    let nf = n as f64;
    let dim = cfg.model.dim;
    let points = cfg.n_snapshots + 1;

    let mut stats = EnsembleStats {
        times: snapshot_times(cfg),
        mean_norm_sq: Vec::with_capacity(points),
        se_norm_sq: Vec::with_capacity(points),
        rho: Vec::with_capacity(points),
        raw_trace: Vec::with_capacity(points),
        rho_se_re: Vec::with_capacity(points),
        rho_se_im: Vec::with_capacity(points),
        ess: Vec::with_capacity(points),
        n_completed: n,
        n_aborted: acc.aborted,
    };

    for j in 0..points {
        let mean = acc.sum_norm[j] / nf;
        let var = ((acc.sum_norm_sq[j] - nf * mean * mean) / (nf - 1.0)).max(0.0);
        stats.mean_norm_sq.push(mean);
        stats.se_norm_sq.push((var / nf).sqrt());
        let denom = acc.sum_norm_sq[j];
        stats.ess.push(if denom > 0.0 { acc.sum_norm[j] * acc.sum_norm[j] / denom } else { 0.0 });

        let raw = acc.sum_outer[j].scale(C64::new(1.0 / nf, 0.0));
        let trace = raw.trace().re;
        stats.raw_trace.push(trace);
        stats.rho.push(raw.scale(C64::new(1.0 / trace, 0.0)));

        let mut se_re = Vec::with_capacity(dim * dim);
        let mut se_im = Vec::with_capacity(dim * dim);
        for (e, v) in raw.data().iter().enumerate() {
            let var_re = ((acc.sum_outer_sq_re[j][e] - nf * v.re * v.re) / (nf - 1.0)).max(0.0);
            let var_im = ((acc.sum_outer_sq_im[j][e] - nf * v.im * v.im) / (nf - 1.0)).max(0.0);
            se_re.push((var_re / nf).sqrt());
            se_im.push((var_im / nf).sqrt());
        }
        stats.rho_se_re.push(se_re);
        stats.rho_se_im.push(se_im);
    }
    Ok(stats)
}

/// Run the ensemble described by `cfg` and summarize it.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleStats, EnsembleError> {
    cfg.validate()?;
    let engine = Engine::prepare(&cfg.model, &cfg.pair, cfg.integrator)?;
    let acc = run_blocks(cfg, &engine, None)?;
    finalize(cfg, &acc)
}

/// Run the ensemble while also accumulating, per trajectory, the residual of
/// the ensemble-averaged projector flow against the memory-kernel master
/// equation, and report both.
pub fn run_ensemble_with_residual(
    cfg: &ExperimentConfig,
) -> Result<(EnsembleStats, MasterResidualReport), EnsembleError> {
    cfg.validate()?;
    let engine = Engine::prepare(&cfg.model, &cfg.pair, cfg.integrator)?;
    let times = snapshot_times(cfg);
    let proto = MasterResidualAccumulator::new(&cfg.model.h, &cfg.model.l, &cfg.pair, &times)?;
    let acc = run_blocks(cfg, &engine, Some(&proto))?;
    let stats = finalize(cfg, &acc)?;
    let report = acc.residual.as_ref().expect("residual accumulator present").finalize()?;
    Ok((stats, report))
}
