//! Closed-form references for the diagonal-coupling (dephasing) qubit.
//!
//! With H = (omega/2) sigma_z and L = g sigma_z the model integrates in
//! closed form for any correlation pair, which yields two independent
//! references:
//!
//! * the ensemble-mean coherence magnitude decays by an explicit factor
//!   built from the double integral of alpha alone — see
//!   [`dephasing_decoherence_factor`];
//! * the conditional expectation of the squared norm given a trajectory
//!   prefix reduces to a one-dimensional Gaussian moment-generating
//!   function of the integrated x component — see
//!   [`dephasing_conditional_norm_oracle`]. For pairs violating the
//!   white-x constraint this predicts *how far* from a martingale the
//!   squared norm is, not merely that it fails.

use super::OracleError;
use crate::linalg::{hermitian_eigen, ComplexMatrix, StateVector, C64};
use crate::noise::kernel::exp_terms;
use crate::noise::CorrelationPair;

/// `exp(-4 g^2 Int_0^t du Int_0^u ds alpha(u,s))`: the exact decay factor
/// of `|rho01(t)| / |rho01(0)|` for the dephasing qubit, independent of
/// the eta correlation. Computed in closed form from kernel parameters.
pub fn dephasing_decoherence_factor(pair: &CorrelationPair, g: f64, t: f64) -> f64 {
    (-4.0 * g * g * pair.alpha_double_integral(t)).exp()
}

/// Sufficient statistics of a trajectory prefix at branch time `s`: the
/// (unnormalized) state and the value of the colored part of x. The x
/// component must be Markov — at most one exponential term — for the
/// endpoint value to capture the whole memory of the prefix.
#[derive(Debug, Clone)]
pub struct DephasingPrefix {
    pub psi_s: StateVector,
    pub colored_x_s: f64,
}

/// `E[ ||psi_t||^2 | noise history up to s ]` for the dephasing qubit.
///
/// The squared norm depends only on `DZ = Int_s^t x du` and on the
/// deterministic exponent `A(t) - A(s)`; conditionally on the history,
/// `DZ` is Gaussian with mean `m_c = x_s (1 - e^{-a tau})/a` (colored
/// part, tau = t - s) and variance
///
/// ```text
/// v = w tau                                        (white part)
///   + (2c/a)[tau - (1-e^{-a tau})/a]
///   - (c/a^2)(1-e^{-a tau})^2                      (colored part)
/// ```
///
/// so each sigma_z eigenvalue lambda = +/- g contributes
/// `|psi_lambda(s)|^2 exp(2 lambda m_c + 2 lambda^2 (v - (A(t)-A(s))))`.
/// For a white-x pair this is identically `||psi_s||^2` — the martingale
/// statement this crate exists to test.
pub fn dephasing_conditional_norm_oracle(
    pair: &CorrelationPair,
    g: f64,
    prefix: &DephasingPrefix,
    s: f64,
    t: f64,
) -> Result<f64, OracleError> {
    if !(s >= 0.0 && t >= s) {
        return Err(OracleError::BadTimes {
            reason: format!("need 0 <= s <= t, got s={s}, t={t}"),
        });
    }
    if prefix.psi_s.dim() != 2 {
        return Err(OracleError::BadSpec {
            reason: format!("dephasing prefix state has dimension {}", prefix.psi_s.dim()),
        });
    }
    let colored = exp_terms(&pair.x);
    if colored.len() > 1 {
        return Err(OracleError::UnsupportedPair {
            reason: format!(
                "x component has {} exponential terms; the conditional law is \
                 closed-form only for at most one",
                colored.len()
            ),
        });
    }
    let tau = t - s;
    let mut m_c = 0.0;
    let mut v = pair.x_white_weight() * tau;
    if let Some(&(c, a)) = colored.first() {
        let decay = 1.0 - (-a * tau).exp();
        m_c = prefix.colored_x_s * decay / a;
        v += (2.0 * c / a) * (tau - decay / a) - (c / (a * a)) * decay * decay;
    }
    let da = pair.drift_exponent(t) - pair.drift_exponent(s);
    let mut total = 0.0;
    for (k, amp) in prefix.psi_s.amps.iter().enumerate() {
        let lam = if k == 0 { g } else { -g };
        total += amp.norm_sqr() * (2.0 * lam * m_c + 2.0 * lam * lam * (v - da)).exp();
    }
    Ok(total)
}

/// Nodes and weights of n-point Gauss-Hermite quadrature (weight
/// function e^{-x^2}), from the eigendecomposition of the Jacobi matrix.
/// `Int e^{-x^2} f(x) dx ~= sum_i w_i f(x_i)`, exact for polynomials of
/// degree < 2n.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>), OracleError> {
    if n == 0 {
        return Err(OracleError::BadSpec { reason: "zero-point quadrature".into() });
    }
    let mut jac = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = C64::new(b, 0.0);
        jac[(k, k - 1)] = C64::new(b, 0.0);
    }
    let (nodes, vectors) = hermitian_eigen(&jac)?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let weights = (0..n).map(|i| sqrt_pi * vectors[(0, i)].norm_sqr()).collect();
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{Kernel, TimeGrid};
    use crate::oracles::gksl::{gksl_solve, GkslSpec};
    use crate::rng::{substream, StreamPurpose};
    use crate::sse::ModelSpec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn balanced() -> StateVector {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![c(r, 0.0), c(r, 0.0)])
    }

    #[test]
    fn factor_matches_hand_integrals() {
        // symmetric white pair, total alpha delta weight 1
        let white = CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::white(0.5)]);
        let t = 0.7;
        assert!((dephasing_decoherence_factor(&white, 1.0, t) - (-2.0 * t).exp()).abs() < 1e-14);
        // purely colored x: double integral (c/a)[t - (1-e^{-at})/a]
        let colored = CorrelationPair::new(vec![Kernel::exp_decay(1.0, 1.0)], vec![]);
        let t = 1.3;
        let want = (-4.0 * (t - 1.0 + (-t as f64).exp())).exp();
        assert!((dephasing_decoherence_factor(&colored, 1.0, t) - want).abs() < 1e-14);
        assert_eq!(dephasing_decoherence_factor(&colored, 1.0, 0.0), 1.0);
    }

    #[test]
    fn factor_agrees_with_the_memoryless_solver_for_white_noise() {
        let pair = CorrelationPair::new(vec![Kernel::white(0.5)], vec![Kernel::white(0.5)]);
        let g = 0.8;
        let model = ModelSpec::dephasing(1.0, g).unwrap();
        let rate = pair.x_white_weight() + pair.y_white_weight();
        let spec = GkslSpec::new(model.h.clone(), model.l.clone(), rate).unwrap();
        let rho0 = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let times = [0.0, 0.4, 0.9, 1.7];
        let sol = gksl_solve(&spec, &rho0, &times).unwrap();
        for (rho, &t) in sol.iter().zip(&times) {
            let want = 0.5 * dephasing_decoherence_factor(&pair, g, t);
            assert!(
                (rho[(0, 1)].norm() - want).abs() < 1e-10,
                "t={t}: {} vs {want}",
                rho[(0, 1)].norm()
            );
        }
    }

    proptest! {
        #[test]
        fn factor_is_monotone_nonincreasing(
            w in 0.0f64..2.0,
            cx in 0.0f64..2.0,
            ax in 0.1f64..5.0,
            cy in 0.0f64..2.0,
            ay in 0.1f64..5.0,
            g in 0.1f64..2.0,
            t1 in 0.0f64..3.0,
            dt in 0.0f64..3.0,
        ) {
            let pair = CorrelationPair::new(
                vec![Kernel::white(w), Kernel::exp_decay(cx, ax)],
                vec![Kernel::exp_decay(cy, ay)],
            );
            let f1 = dephasing_decoherence_factor(&pair, g, t1);
            let f2 = dephasing_decoherence_factor(&pair, g, t1 + dt);
            prop_assert!(f2 <= f1 * (1.0 + 1e-12));
            prop_assert!(f1 <= 1.0 + 1e-12);
            prop_assert!(f1 > 0.0);
        }
    }

    #[test]
    fn white_x_pair_predicts_a_flat_conditional_norm() {
        let pair =
            CorrelationPair::new(vec![Kernel::white(0.7)], vec![Kernel::exp_decay(1.0, 1.0)]);
        let prefix = DephasingPrefix {
            psi_s: StateVector::new(vec![c(0.9, 0.1), c(0.2, -0.3)]),
            colored_x_s: 0.0,
        };
        let nsq = prefix.psi_s.norm_sq();
        for t in [0.5, 1.0, 2.5, 7.0] {
            let got = dephasing_conditional_norm_oracle(&pair, 1.2, &prefix, 0.5, t).unwrap();
            assert!((got - nsq).abs() < 1e-14 * nsq, "t={t}: {got} vs {nsq}");
        }
    }

    #[test]
    fn colored_x_from_zero_prefix_value_sits_below_the_martingale_line() {
        let pair = CorrelationPair::new(vec![Kernel::exp_decay(1.0, 1.0)], vec![]);
        let prefix = DephasingPrefix { psi_s: balanced(), colored_x_s: 0.0 };
        let (s, t) = (0.5, 1.5);
        let got = dephasing_conditional_norm_oracle(&pair, 1.0, &prefix, s, t).unwrap();
        // balanced state, x_s = 0: both eigenvalues share the factor
        // e^{2(v - dA)}, and conditioning removes variance, so v < dA
        let tau = t - s;
        let decay = 1.0 - (-tau as f64).exp();
        let v = 2.0 * (tau - decay) - decay * decay;
        let da = pair.drift_exponent(t) - pair.drift_exponent(s);
        assert!((got - (2.0 * (v - da)).exp()).abs() < 1e-14);
        assert!(got < 1.0 - 1e-3, "conditional norm {got} should dip below 1");
        // continuity at tau -> 0+
        let near = dephasing_conditional_norm_oracle(&pair, 1.0, &prefix, s, s + 1e-9).unwrap();
        assert!((near - 1.0).abs() < 1e-7);
    }

    #[test]
    fn conditional_law_matches_a_direct_simulation_of_the_colored_component() {
        // Monte Carlo over exact O-U continuations started from a fixed
        // x_s: the empirical mean of each eigenvalue's norm factor must
        // match the closed-form moment-generating value.
        let (cx, ax) = (0.8, 1.3);
        let pair = CorrelationPair::new(vec![Kernel::exp_decay(cx, ax)], vec![]);
        let g = 0.9;
        let x_s = 0.6;
        let (s, t) = (0.4, 1.4);
        let prefix = DephasingPrefix { psi_s: balanced(), colored_x_s: x_s };
        let want = dephasing_conditional_norm_oracle(&pair, g, &prefix, s, t).unwrap();

        let grid = TimeGrid::new(t - s, 1e-3).unwrap();
        let n = 20_000;
        let da = pair.drift_exponent(t) - pair.drift_exponent(s);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for i in 0..n {
            let mut rng = substream(71, StreamPurpose::NoiseValidation, i as u64, 0);
            let path =
                crate::noise::continue_ou_exact(cx, ax, x_s, grid.n_steps(), grid.dt(), &mut rng);
            let mut dz = 0.0;
            for k in 0..grid.n_steps() {
                dz += 0.5 * grid.dt() * (path[k] + path[k + 1]);
            }
            let val = 0.5 * ((2.0 * g * dz - 2.0 * g * g * da).exp()
                + (-2.0 * g * dz - 2.0 * g * g * da).exp());
            sum += val;
            sumsq += val * val;
        }
        let mean = sum / n as f64;
        let se = (((sumsq / n as f64 - mean * mean).max(0.0)) / n as f64).sqrt();
        assert!(
            (mean - want).abs() < 4.0 * se + 1e-4,
            "MC {mean} (se {se}) vs oracle {want}"
        );
    }

    #[test]
    fn averaging_the_oracle_over_the_prefix_law_returns_one() {
        // Law of total expectation: E over the joint stationary law of
        // (Zx_s, x_s) of the conditional prediction equals the
        // unconditional mean, which is 1 for a normalized initial state.
        // The joint covariance is [[A(s), C_s], [C_s, c]] with
        // C_s = c (1 - e^{-a s})/a.
        let (w, cx, ax) = (0.2, 0.8, 1.3);
        let pair = CorrelationPair::new(
            vec![Kernel::white(w), Kernel::exp_decay(cx, ax)],
            vec![Kernel::exp_decay(0.5, 2.0)],
        );
        let g = 0.9;
        let (s, t) = (0.6, 1.7);
        let a_s = pair.drift_exponent(s);
        let c_s = cx * (1.0 - (-ax * s).exp()) / ax;
        // Cholesky of the 2x2 covariance
        let l11 = a_s.sqrt();
        let l21 = c_s / l11;
        let l22 = (cx - l21 * l21).max(0.0).sqrt();

        let (nodes, weights) = gauss_hermite(40).unwrap();
        let norm = std::f64::consts::PI; // (sqrt(pi))^2 for two dimensions
        let mut total = 0.0;
        for (&u1, &w1) in nodes.iter().zip(&weights) {
            for (&u2, &w2) in nodes.iter().zip(&weights) {
                let z1 = std::f64::consts::SQRT_2 * u1;
                let z2 = std::f64::consts::SQRT_2 * u2;
                let zx_s = l11 * z1;
                let x_s = l21 * z1 + l22 * z2;
                // |psi_lambda(s)|^2 for a balanced start
                let p_plus = 0.5 * (2.0 * g * zx_s - 2.0 * g * g * a_s).exp();
                let p_minus = 0.5 * (-2.0 * g * zx_s - 2.0 * g * g * a_s).exp();
                let prefix = DephasingPrefix {
                    psi_s: StateVector::new(vec![
                        c(p_plus.sqrt(), 0.0),
                        c(p_minus.sqrt(), 0.0),
                    ]),
                    colored_x_s: x_s,
                };
                let cond =
                    dephasing_conditional_norm_oracle(&pair, g, &prefix, s, t).unwrap();
                total += w1 * w2 * cond;
            }
        }
        total /= norm;
        assert!((total - 1.0).abs() < 1e-6, "total expectation {total}");
    }

    #[test]
    fn multi_term_colored_x_is_rejected() {
        let pair = CorrelationPair::new(
            vec![Kernel::exp_decay(1.0, 1.0), Kernel::exp_decay(0.5, 3.0)],
            vec![],
        );
        let prefix = DephasingPrefix { psi_s: balanced(), colored_x_s: 0.0 };
        assert!(matches!(
            dephasing_conditional_norm_oracle(&pair, 1.0, &prefix, 0.0, 1.0),
            Err(OracleError::UnsupportedPair { .. })
        ));
    }

    #[test]
    fn quadrature_reproduces_gaussian_moments() {
        let (nodes, weights) = gauss_hermite(12).unwrap();
        let total: f64 = weights.iter().sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // E[X^4] = 3/4 for X ~ N(0, 1/2); exact for n >= 3
        let m4: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| w * x.powi(4))
            .sum::<f64>()
            / std::f64::consts::PI.sqrt();
        assert!((m4 - 0.75).abs() < 1e-12, "fourth moment {m4}");
        // and a genuinely non-polynomial check: E[e^X], X ~ N(0, 1/2)
        let mgf: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| w * (std::f64::consts::SQRT_2 * x).exp())
            .sum::<f64>()
            / std::f64::consts::PI.sqrt();
        assert!((mgf - (0.5f64).exp()).abs() < 1e-9, "mgf {mgf}");
    }
}
