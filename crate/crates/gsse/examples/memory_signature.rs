//! What memory looks like in the reduced dynamics.
//!
//! For a dephasing qubit driven through x with kernel c e^{-a|tau|}, the
//! coherence decays as exp(-4 g^2 D(t)) with D the double integral of the
//! correlation — quadratic at early times (t << 1/a), linear only once the
//! kernel has decorrelated. No constant-rate exponential reproduces that
//! knee. This example
//!
//! 1. measures |rho_01(t)| from an ensemble and checks it against the
//!    closed form within Monte Carlo error,
//! 2. contrasts it with the constant-rate curve of equal integrated flux,
//!    whose early-time slope is wrong, and
//! 3. verifies the ensemble satisfies the time-local memory-kernel master
//!    equation: the finite-difference residual of d rho/dt against
//!    the kernel-integrated generator stays inside 3 Monte Carlo sigma,
//!    with the time-dependent dissipator rate printed alongside.

use gsse::ensemble::{run_ensemble_with_residual, ExperimentConfig};
use gsse::noise::{CorrelationPair, Kernel, TimeGrid};
use gsse::oracles::dephasing_decoherence_factor;
use gsse::sse::{IntegratorKind, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = 1.0;
    let (c, a) = (1.0, 2.0);
    let w_y = 0.25;
    // The white y component keeps the coherence genuinely stochastic: with
    // x alone the two dephasing phases cancel trajectory by trajectory and
    // every Monte Carlo error collapses to zero, which would make pulls
    // meaningless. y contributes (w_y/2) t to the same double integral.
    let pair =
        CorrelationPair::new(vec![Kernel::exp_decay(c, a)], vec![Kernel::white(w_y)]);
    let flux = 2.0 * c / a + w_y; // equal-flux constant rate for the contrast curve
    let cfg = ExperimentConfig {
        model: ModelSpec::dephasing(1.0, g)?,
        pair: pair.clone(),
        grid: TimeGrid::new(2.0, 1e-3)?,
        n_trajectories: 4000,
        master_seed: 81,
        integrator: IntegratorKind::DephasingExact,
        n_snapshots: 50,
        branching: None,
        workers: None,
    };

    let (stats, residual) = run_ensemble_with_residual(&cfg)?;

    println!("kernel x: {c} exp(-{a}|tau|), y: white({w_y}); coupling g = {g}, {} trajectories", cfg.n_trajectories);
    println!();
    println!(
        "{:>6}  {:>10}  {:>12}  {:>8}  {:>12}",
        "t", "|rho_01|", "closed form", "pull", "const-rate"
    );
    let mut worst_pull: f64 = 0.0;
    let mut max_flat_gap: f64 = 0.0;
    for j in (1..stats.times.len()).step_by(5) {
        let t = stats.times[j];
        // undo the trace normalization: the closed form predicts the raw
        // projector average, whose entrywise standard errors are recorded
        let measured = stats.rho[j][(0, 1)].norm() * stats.raw_trace[j];
        let predicted = 0.5 * dephasing_decoherence_factor(&pair, g, t);
        let flat = 0.5 * (-4.0 * g * g * (flux / 2.0) * t).exp();
        // rho_01 standard error, combining the real and imaginary parts
        let se = stats.rho_se_re[j][1].hypot(stats.rho_se_im[j][1]);
        let pull = (measured - predicted) / se;
        worst_pull = worst_pull.max(pull.abs());
        max_flat_gap = max_flat_gap.max((predicted - flat).abs() / se);
        println!("{t:>6.2}  {measured:>10.5}  {predicted:>12.5}  {pull:>8.2}  {flat:>12.5}");
    }
    println!();
    println!("worst |measured - closed form| / se = {worst_pull:.2} (statistical agreement)");
    println!(
        "the equal-flux constant-rate curve misses by up to {max_flat_gap:.0} sigma: \
         the early-time knee is the memory"
    );
    println!();

    println!("memory-kernel master equation residual (finite-difference check):");
    println!("{:>6}  {:>12}  {:>10}  {:>10}", "t", "max |resid|", "margin", "rate 2m(t)");
    for j in (0..residual.times.len()).step_by(8) {
        println!(
            "{:>6.2}  {:>12.3e}  {:>10.3}  {:>10.4}",
            residual.times[j], residual.max_abs_mean[j], residual.margins[j], residual.rates[j]
        );
    }
    println!(
        "residual verdict: {} (every margin <= 1 means d rho/dt matches the \
         kernel-integrated generator within 3 sigma)",
        if residual.pass { "PASS" } else { "FAIL" }
    );
    println!(
        "note the dissipator rate 2m(t) grows from 0 toward the flux {:.2}: \
         another face of the same memory",
        flux
    );
    Ok(())
}
