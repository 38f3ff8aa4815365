//! The branching test: is the squared norm a martingale?
//!
//! A mean-one squared norm at fixed times is necessary but not sufficient
//! for a measurement interpretation; the conditional mean given any noise
//! history must also reproduce the current squared norm. This example
//! freezes an ensemble of trajectory prefixes at a branch time s, continues
//! each prefix with many fresh noise futures drawn from the correct
//! conditional law, and compares the continuation average against the
//! frozen squared norm at several checkpoints.
//!
//! Each prefix/checkpoint cell yields a z-score. The test passes when the
//! exceedance count over |z| = 3 is consistent with the Gaussian null.

use gsse::ensemble::{martingale_branch_test, BranchingParams, ExperimentConfig};
use gsse::noise::{CorrelationPair, Kernel, TimeGrid};
use gsse::sse::{IntegratorKind, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        model: ModelSpec::spin_boson(1.0, 1.0)?,
        pair: CorrelationPair::new(
            vec![Kernel::white(0.5)],
            vec![Kernel::exp_decay(1.0, 1.0)],
        ),
        grid: TimeGrid::new(1.5, 1e-3)?,
        n_trajectories: 2,
        master_seed: 2024,
        integrator: IntegratorKind::EmIto,
        n_snapshots: 15,
        branching: Some(BranchingParams {
            s: 0.5,
            n_prefixes: 24,
            m_continuations: 600,
            checkpoint_offsets: vec![0.1, 0.5, 1.0],
        }),
        workers: None,
    };

    let params = cfg.branching.as_ref().unwrap();
    println!(
        "branch time s = {}, {} prefixes x {} continuations, checkpoints at s + {:?}",
        params.s, params.n_prefixes, params.m_continuations, params.checkpoint_offsets
    );
    println!();

    let report = martingale_branch_test(&cfg)?;

    println!("first prefixes (z per checkpoint):");
    println!("{:>7}  {:>10}  {:>24}", "prefix", "|psi_s|^2", "z at each checkpoint");
    for record in report.prefixes.iter().take(8) {
        let zs: Vec<String> =
            record.checkpoints.iter().map(|c| format!("{:>6.2}", c.z)).collect();
        println!(
            "{:>7}  {:>10.4}  {}",
            record.prefix_index,
            record.norm_sq_s,
            zs.join(" ")
        );
    }
    println!("   ... ({} prefixes total)", report.prefixes.len());
    println!();
    println!(
        "exceedances over |z| = 3: {} of {} cells ({:.2}%)",
        report.n_exceed,
        report.n_z,
        100.0 * report.frac_exceed
    );
    println!("exact binomial p-value vs the Gaussian null: {:.3}", report.binom_p_value);
    println!("mean |z| = {:.3}, pooled drift z = {:.2}", report.mean_abs_z, report.combined_z);
    println!(
        "(the pooled statistic is sharp enough to resolve the stepper's O(dt) bias,\n\
         ~1e-3 per unit time here; the pass rule counts per-cell |z| > 3 exceedances,\n\
         which that bias cannot reach)"
    );
    println!();
    println!("verdict: {}", if report.pass { "PASS (martingale)" } else { "FAIL" });
    Ok(())
}
