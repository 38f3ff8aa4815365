//! Two configurations that must FAIL the branching test, and do.
//!
//! A test that never rejects proves nothing, so this example runs the
//! martingale check on two ensembles engineered to break it:
//!
//! 1. a dephasing qubit whose x component is colored (exponential kernel,
//!    no delta part) — the squared norm then drifts in a way an independent
//!    closed-form oracle predicts exactly, and
//! 2. white noise driving a non-Hermitian coupling L = sigma_minus, where
//!    the squared norm picks up a positive drift because the generator term
//!    (kappa/4)(2 L^dag L - L^2 - (L^dag)^2) no longer vanishes.
//!
//! Both failures are physics, not statistics: the first is confirmed
//! against the conditional-norm oracle, the second against the exact
//! linear drift law of the mean squared norm.

use gsse::ensemble::{
    martingale_branch_test, run_ensemble, BranchingParams, ExperimentConfig,
};
use gsse::linalg::{ComplexMatrix, StateVector, C64};
use gsse::noise::{CorrelationPair, Kernel, TimeGrid};
use gsse::oracles::{dephasing_conditional_norm_oracle, DephasingPrefix};
use gsse::sse::model::sigma_z;
use gsse::sse::{IntegratorKind, ModelSpec};

fn colored_x_dephasing() -> Result<(), Box<dyn std::error::Error>> {
    println!("--- control 1: colored x on a dephasing qubit ---");
    let g = 0.5;
    let cfg = ExperimentConfig {
        model: ModelSpec::dephasing(1.0, g)?,
        pair: CorrelationPair::new(vec![Kernel::exp_decay(1.0, 1.0)], vec![]),
        grid: TimeGrid::new(0.9, 1e-3)?,
        n_trajectories: 2,
        master_seed: 31,
        integrator: IntegratorKind::HeunStrat,
        n_snapshots: 9,
        branching: Some(BranchingParams {
            s: 0.4,
            n_prefixes: 16,
            m_continuations: 500,
            checkpoint_offsets: vec![0.25, 0.5],
        }),
        workers: None,
    };

    let report = martingale_branch_test(&cfg)?;
    println!(
        "martingale verdict: {}   ({} of {} cells beyond |z| = 3, mean |z| = {:.1})",
        if report.pass { "PASS (unexpected!)" } else { "FAIL (expected)" },
        report.n_exceed,
        report.n_z,
        report.mean_abs_z
    );

    // The failure is quantitative: conditioned on the noise history, the
    // continuation mean should track the closed-form conditional norm, not
    // the frozen squared norm.
    let mut worst_oracle_pull: f64 = 0.0;
    for record in &report.prefixes {
        let prefix =
            DephasingPrefix { psi_s: record.psi_s.clone(), colored_x_s: record.colored_x_s };
        for ck in &record.checkpoints {
            let predicted =
                dephasing_conditional_norm_oracle(&cfg.pair, g, &prefix, report.s, ck.t)?;
            let pull = (ck.cond_mean - predicted) / ck.se;
            worst_oracle_pull = worst_oracle_pull.max(pull.abs());
        }
    }
    println!(
        "worst |continuation mean - closed-form conditional norm| / se = {worst_oracle_pull:.2}"
    );
    println!("(the drift matches the oracle, so the rejection is real physics)");
    println!();
    Ok(())
}

fn non_hermitian_coupling() -> Result<(), Box<dyn std::error::Error>> {
    println!("--- control 2: white noise on L = sigma_minus ---");
    let dim = 2;
    let mut l = ComplexMatrix::zeros(dim, dim);
    l[(1, 0)] = C64::new(1.0, 0.0);
    let h = sigma_z().scale(C64::new(0.5, 0.0));
    let r = 1.0 / (2.0f64).sqrt();
    let psi0 = StateVector::new(vec![C64::new(r, 0.0), C64::new(r, 0.0)]);
    let w = 0.5; // kappa = 2w = 1

    let cfg = ExperimentConfig {
        model: ModelSpec::custom(h, l, psi0)?,
        pair: CorrelationPair::new(vec![Kernel::white(w)], vec![]),
        grid: TimeGrid::new(1.2, 1e-3)?,
        n_trajectories: 4000,
        master_seed: 32,
        integrator: IntegratorKind::EmIto,
        n_snapshots: 12,
        branching: None,
        workers: None,
    };

    let stats = run_ensemble(&cfg)?;
    // The unnormalized mean rho_u = E[psi psi^dag] obeys
    //   d rho_u/dt = -i[H, rho_u] + (kappa/2) L rho_u L^dag
    // (the L^2 drift terms vanish since sigma_minus is nilpotent). The
    // source population rho_00 is conserved, so the trace grows linearly:
    //   E[|psi_t|^2] = 1 + (kappa/4) t.
    let rate = cfg.pair.kappa() / 4.0;
    println!("{:>6}  {:>12}  {:>12}  {:>8}", "t", "mean |psi|^2", "1 + t k/4", "pull");
    let mut pulls = Vec::new();
    for j in (1..stats.times.len()).step_by(3) {
        let t = stats.times[j];
        let predicted = 1.0 + rate * t;
        let pull = (stats.mean_norm_sq[j] - predicted) / stats.se_norm_sq[j];
        pulls.push(pull.abs());
        println!(
            "{:>6.2}  {:>12.6}  {:>12.6}  {:>8.2}",
            t, stats.mean_norm_sq[j], predicted, pull
        );
    }
    let drift_z = (stats.mean_norm_sq.last().unwrap() - 1.0) / stats.se_norm_sq.last().unwrap();
    println!("squared norm is NOT mean-one: final pull away from 1 is {drift_z:.0} sigma");
    let worst = pulls.iter().cloned().fold(0.0, f64::max);
    println!("but it matches the predicted linear drift (worst pull {worst:.2})");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    colored_x_dephasing()?;
    non_hermitian_coupling()
}
