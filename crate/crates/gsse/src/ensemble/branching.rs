//! Conditional branching test of the norm-martingale property.
//!
//! For each of `n_prefixes` independently sampled noise prefixes the state is
//! propagated to the branch time `s` and frozen. `m` continuations of the
//! noise are then drawn from its exact conditional law given the prefix, each
//! is propagated to the checkpoint times, and the conditional mean of the
//! squared norm is compared against the frozen squared norm through a
//! z-score. If the squared norm is a conditional martingale the z-scores are
//! asymptotically standard normal; the aggregate verdict tests exactly that.

use rayon::prelude::*;
use statrs::distribution::{Binomial, Discrete};

use crate::noise::{condition_continue, sample_realization, NoiseRealization};
use crate::rng::{substream, StreamPurpose};
use crate::sse::{propagate_segment, Engine, Scratch, SseError};

use super::run::effective_workers;
use super::{ConfigError, EnsembleError, ExperimentConfig, MAX_ABORT_FRACTION};

/// A z-score counts as an exceedance when its magnitude passes this bound.
pub const Z_THRESHOLD: f64 = 3.0;

/// Exceedance probability of `|N(0,1)| > 3`, the null rate of the binomial
/// verdict.
pub const EXCEED_NULL_PROBABILITY: f64 = 0.002_699_796_063_260_186_6;

/// Exceedance fraction above 1% fails outright (tested in exact integer
/// arithmetic); otherwise the exact binomial test must not reject the null
/// at this level.
pub const MIN_BINOMIAL_P: f64 = 0.01;

/// Relative floor applied to conditional standard errors before forming a
/// z-score, so deterministic configurations (zero conditional variance, with
/// differences at the last-ulps level) report z = 0 instead of 0/0.
const SE_RELATIVE_FLOOR: f64 = 1e-14;

/// Conditional statistics at one checkpoint of one prefix.
#[derive(Debug, Clone, Copy)]
pub struct CheckpointStat {
    pub t: f64,
    pub cond_mean: f64,
    pub se: f64,
    pub z: f64,
}

/// One frozen prefix: the state, squared norm, and colored-noise values at
/// the branch time, and the conditional comparison at every checkpoint.
#[derive(Debug, Clone)]
pub struct PrefixRecord {
    pub prefix_index: usize,
    pub psi_s: crate::linalg::StateVector,
    pub norm_sq_s: f64,
    pub colored_x_s: f64,
    pub colored_y_s: f64,
    pub checkpoints: Vec<CheckpointStat>,
}

/// Aggregate outcome of the branching test.
#[derive(Debug, Clone)]
pub struct BranchingReport {
    pub s: f64,
    pub checkpoint_times: Vec<f64>,
    pub prefixes: Vec<PrefixRecord>,
    /// Total number of z-scores (prefixes x checkpoints).
    pub n_z: usize,
    pub n_exceed: usize,
    pub frac_exceed: f64,
    /// Two-sided exact binomial p-value of `n_exceed` against the null rate.
    pub binom_p_value: f64,
    pub mean_abs_z: f64,
    /// `mean(z) * sqrt(n_z)`: a pooled drift statistic. Under the martingale
    /// null it is approximately standard normal; systematic norm drift pushes
    /// it far out in one direction.
    pub combined_z: f64,
    pub aborted_continuations: usize,
    pub pass: bool,
}

/// Two-sided exact binomial p-value by the minimum-likelihood method: the
/// total probability of all outcomes no more likely than the observed one.
pub fn binomial_two_sided_p_value(n: usize, k: usize, p0: f64) -> f64 {
    let dist = Binomial::new(p0, n as u64).expect("valid binomial parameters");
    let pk = dist.pmf(k as u64);
    // the relative fudge keeps float ties (equal-probability outcomes) inside
    let cut = pk * (1.0 + 1e-12);
    (0..=n as u64).map(|j| dist.pmf(j)).filter(|&pj| pj <= cut).sum::<f64>().min(1.0)
}

/// Keep the first `steps` steps of a full-grid realization.
fn truncate_realization(full: &NoiseRealization, steps: usize) -> NoiseRealization {
    debug_assert_eq!(full.start_index, 0);
    debug_assert!(steps <= full.steps);
    NoiseRealization {
        start_index: 0,
        steps,
        colored_x: full.colored_x[..=steps].to_vec(),
        colored_y: full.colored_y[..=steps].to_vec(),
        white_x: full.white_x[..steps].to_vec(),
        white_y: full.white_y[..steps].to_vec(),
    }
}

struct PrefixOutcome {
    record: PrefixRecord,
    aborted: usize,
}

fn run_prefix(
    cfg: &ExperimentConfig,
    engine: &Engine,
    p: usize,
    s_idx: usize,
    ck_indices: &[usize],
) -> Result<PrefixOutcome, EnsembleError> {
    let m = cfg.branching.as_ref().expect("validated").m_continuations;
    let mut rng = substream(cfg.master_seed, StreamPurpose::BranchPrefix, p as u64, 0);
    let full = sample_realization(&cfg.pair, &cfg.grid, true, &mut rng);
    let prefix = truncate_realization(&full, s_idx);

    let mut psi_s = cfg.model.psi0.amps.clone();
    let mut scratch = Scratch::new(cfg.model.dim);
    propagate_segment(engine, &mut psi_s, &cfg.grid, &prefix, &mut scratch, |_, _, _| {})?;
    let norm_sq_s: f64 = psi_s.iter().map(|a| a.norm_sqr()).sum();

    let last_ck = *ck_indices.last().expect("validated: nonempty checkpoints");
    let n_ck = ck_indices.len();
    let mut sums = vec![0.0; n_ck];
    let mut sums_sq = vec![0.0; n_ck];
    let mut observed = vec![0.0; n_ck];
    let mut completed = 0usize;
    let mut aborted = 0usize;

    for cont in 0..m {
        let mut cont_rng =
            substream(cfg.master_seed, StreamPurpose::BranchContinuation, p as u64, cont as u64);
        let seg = condition_continue(&cfg.pair, &cfg.grid, &prefix, last_ck, &mut cont_rng)?;
        let mut psi = psi_s.clone();
        let status = propagate_segment(
            engine,
            &mut psi,
            &cfg.grid,
            &seg,
            &mut scratch,
            |idx, _, nsq| {
                if let Some(slot) = ck_indices.iter().position(|&k| k == idx) {
                    observed[slot] = nsq;
                }
            },
        );
        match status {
            Ok(()) => {
                completed += 1;
                for (slot, &value) in observed.iter().enumerate() {
                    sums[slot] += value;
                    sums_sq[slot] += value * value;
                }
            }
            Err(SseError::Overflow { .. }) => aborted += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if completed < 2 {
        return Err(EnsembleError::TooManyAborts { aborted, total: m });
    }

    let nf = completed as f64;
    let checkpoints = ck_indices
        .iter()
        .enumerate()
        .map(|(slot, &k)| {
            let cond_mean = sums[slot] / nf;
            let var = ((sums_sq[slot] - nf * cond_mean * cond_mean) / (nf - 1.0)).max(0.0);
            let se = (var / nf).sqrt();
            let se_floored = se.max(SE_RELATIVE_FLOOR * norm_sq_s.max(f64::MIN_POSITIVE));
            CheckpointStat {
                t: cfg.grid.time(k),
                cond_mean,
                se,
                z: (cond_mean - norm_sq_s) / se_floored,
            }
        })
        .collect();

    Ok(PrefixOutcome {
        record: PrefixRecord {
            prefix_index: p,
            psi_s: crate::linalg::StateVector::new(psi_s),
            norm_sq_s,
            colored_x_s: prefix.colored_x[s_idx],
            colored_y_s: prefix.colored_y[s_idx],
            checkpoints,
        },
        aborted,
    })
}

/// Run the branching test described by `cfg` (which must carry branching
/// parameters) and aggregate the verdict.
pub fn martingale_branch_test(cfg: &ExperimentConfig) -> Result<BranchingReport, EnsembleError> {
    cfg.validate()?;
    let params = cfg.branching.as_ref().ok_or(ConfigError::MissingBranching)?.clone();
    let (s_idx, ck_indices) = cfg.branch_indices()?;
    let engine = Engine::prepare(&cfg.model, &cfg.pair, cfg.integrator)?;

    let workers = effective_workers(cfg.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EnsembleError::Pool(e.to_string()))?;
    let outcomes: Result<Vec<PrefixOutcome>, EnsembleError> = pool.install(|| {
        (0..params.n_prefixes)
            .into_par_iter()
            .map(|p| run_prefix(cfg, &engine, p, s_idx, &ck_indices))
            .collect()
    });
    let outcomes = outcomes?;

    let aborted_continuations: usize = outcomes.iter().map(|o| o.aborted).sum();
    let total_continuations = params.n_prefixes * params.m_continuations;
    if aborted_continuations as f64 > MAX_ABORT_FRACTION * total_continuations as f64 {
        return Err(EnsembleError::TooManyAborts {
            aborted: aborted_continuations,
            total: total_continuations,
        });
    }

    let prefixes: Vec<PrefixRecord> = outcomes.into_iter().map(|o| o.record).collect();
    let zs: Vec<f64> =
        prefixes.iter().flat_map(|p| p.checkpoints.iter().map(|c| c.z)).collect();
    let n_z = zs.len();
    let n_exceed = zs.iter().filter(|z| z.abs() > Z_THRESHOLD).count();
    let frac_exceed = n_exceed as f64 / n_z as f64;
    let binom_p_value = binomial_two_sided_p_value(n_z, n_exceed, EXCEED_NULL_PROBABILITY);
    let mean_z = zs.iter().sum::<f64>() / n_z as f64;
    let mean_abs_z = zs.iter().map(|z| z.abs()).sum::<f64>() / n_z as f64;
    // integer comparison keeps the 1% cut exact
    let frac_ok = n_exceed * 100 <= n_z;
    let pass = frac_ok && binom_p_value >= MIN_BINOMIAL_P;

    Ok(BranchingReport {
        s: params.s,
        checkpoint_times: ck_indices.iter().map(|&k| cfg.grid.time(k)).collect(),
        prefixes,
        n_z,
        n_exceed,
        frac_exceed,
        binom_p_value,
        mean_abs_z,
        combined_z: mean_z * (n_z as f64).sqrt(),
        aborted_continuations,
        pass,
    })
}
