//! Stationary correlation kernels and the two-component complex noise model.
//!
//! The driving noise is z*_t = x_t - i y_t with x and y independent,
//! zero-mean, real, stationary Gaussian processes. Writing <.> for the
//! ensemble mean, the two correlation functions that characterize z* are
//!
//! ```text
//! alpha(t,s) = <z_t z*_s> = <x x> + <y y>      (Hermitian correlation)
//! eta(t,s)   = <z*_t z*_s> = <x x> - <y y>     (relation / pseudo-correlation)
//! ```
//!
//! Each component's autocovariance is a sum of primitive kernels:
//! `White(weight)` contributes `weight * delta(t-s)` and `ExpDecay(c, a)`
//! contributes `c * exp(-a |t-s|)` (an Ornstein-Uhlenbeck process with
//! stationary variance `c` and relaxation rate `a`).
//!
//! A time-continuous measurement interpretation of the trajectory ensemble
//! requires `alpha + eta = kappa * delta`, i.e. a purely white x component;
//! [`CorrelationPair::delta_constraint_residual`] measures the violation as
//! the integrated absolute smooth part of `alpha + eta`.

use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky_psd, RealSymmetricMatrix};

/// One primitive stationary autocovariance term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    /// `weight * delta(t-s)`; `weight >= 0` for a valid autocovariance.
    White { weight: f64 },
    /// `c * exp(-a |t-s|)`; requires `a > 0` and `c >= 0` for validity.
    #[serde(rename = "exp")]
    ExpDecay { c: f64, a: f64 },
}

impl Kernel {
    pub fn white(weight: f64) -> Self {
        Kernel::White { weight }
    }

    pub fn exp_decay(c: f64, a: f64) -> Self {
        Kernel::ExpDecay { c, a }
    }

    /// Violations of the autocovariance validity conditions, as messages.
    fn violations(&self, component: &str, out: &mut Vec<String>) {
        match *self {
            Kernel::White { weight } => {
                if !weight.is_finite() {
                    out.push(format!("{component}: white weight must be finite"));
                } else if weight < 0.0 {
                    out.push(format!(
                        "{component}: white weight {weight} is negative (not an autocovariance; \
                         would encode |eta| exceeding alpha)"
                    ));
                }
            }
            Kernel::ExpDecay { c, a } => {
                if !c.is_finite() || !a.is_finite() {
                    out.push(format!("{component}: exp-decay parameters must be finite"));
                    return;
                }
                if a <= 0.0 {
                    out.push(format!("{component}: exp-decay rate a = {a} must be > 0"));
                }
                if c < 0.0 {
                    out.push(format!(
                        "{component}: exp-decay amplitude c = {c} is negative (not an \
                         autocovariance; would encode |eta| exceeding alpha)"
                    ));
                }
            }
        }
    }
}

/// Sum-of-kernels autocovariance of one real noise component.
pub type Component = Vec<Kernel>;

/// Total delta weight of a component.
pub fn white_weight(component: &Component) -> f64 {
    component
        .iter()
        .map(|k| match *k {
            Kernel::White { weight } => weight,
            Kernel::ExpDecay { .. } => 0.0,
        })
        .sum()
}

/// The `(c, a)` parameters of the colored terms of a component.
pub fn exp_terms(component: &Component) -> Vec<(f64, f64)> {
    component
        .iter()
        .filter_map(|k| match *k {
            Kernel::ExpDecay { c, a } => Some((c, a)),
            Kernel::White { .. } => None,
        })
        .collect()
}

/// Smooth (non-delta) part of a component's autocovariance at lag `tau`.
pub fn smooth_eval(component: &Component, tau: f64) -> f64 {
    exp_terms(component)
        .iter()
        .map(|&(c, a)| c * (-a * tau.abs()).exp())
        .sum()
}

/// `Var(Int_0^t r ds)` for a component with this autocovariance:
/// `w t` per white term and `(2c/a) [t - (1 - e^{-a t})/a]` per colored term.
pub fn integrated_variance(component: &Component, t: f64) -> f64 {
    let mut v = white_weight(component) * t;
    for (c, a) in exp_terms(component) {
        v += (2.0 * c / a) * (t - (1.0 - (-a * t).exp()) / a);
    }
    v
}

/// `Int_0^t <r_t r_s> ds` (the running one-sided integral, delta terms
/// counting with endpoint weight 1/2): `w/2` per white term and
/// `(c/a)(1 - e^{-a t})` per colored term.
pub fn running_integral(component: &Component, t: f64) -> f64 {
    let mut v = 0.5 * white_weight(component);
    for (c, a) in exp_terms(component) {
        v += (c / a) * (1.0 - (-a * t).exp());
    }
    v
}

/// Which of the two correlation functions of z* to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichCorrelation {
    /// `alpha = <x x> + <y y>`
    Alpha,
    /// `eta = <x x> - <y y>`
    Eta,
}

/// Independent x / y component kernels defining the complex noise
/// z* = x - i y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub x: Component,
    pub y: Component,
}

impl CorrelationPair {
    pub fn new(x: Component, y: Component) -> Self {
        Self { x, y }
    }

    /// Delta weight of x's autocovariance.
    pub fn x_white_weight(&self) -> f64 {
        white_weight(&self.x)
    }

    /// Delta weight of y's autocovariance.
    pub fn y_white_weight(&self) -> f64 {
        white_weight(&self.y)
    }

    /// `kappa` in `alpha + eta = kappa * delta + (smooth part)`:
    /// twice the white weight of x.
    pub fn kappa(&self) -> f64 {
        2.0 * self.x_white_weight()
    }

    /// Evaluate `alpha` or `eta` at lag `tau`, returning
    /// `(smooth part, delta weight)` separately.
    pub fn correlation_eval(&self, which: WhichCorrelation, tau: f64) -> (f64, f64) {
        let (sx, wx) = (smooth_eval(&self.x, tau), self.x_white_weight());
        let (sy, wy) = (smooth_eval(&self.y, tau), self.y_white_weight());
        match which {
            WhichCorrelation::Alpha => (sx + sy, wx + wy),
            WhichCorrelation::Eta => (sx - sy, wx - wy),
        }
    }

    /// Integrated absolute smooth part of `alpha + eta = 2 <x x>`:
    /// zero exactly when x is purely white, `4c/a` per colored x term.
    pub fn delta_constraint_residual(&self) -> f64 {
        exp_terms(&self.x).iter().map(|&(c, a)| 4.0 * c.abs() / a).sum()
    }

    /// True when the x component has no colored part (the noise admits the
    /// time-local stepping rule).
    pub fn satisfies_delta_constraint(&self) -> bool {
        exp_terms(&self.x).is_empty()
    }

    /// True when neither component has a white part (smooth driving noise,
    /// integrable as an ordinary ODE per realization).
    pub fn is_all_colored(&self) -> bool {
        self.x_white_weight() == 0.0
            && self.y_white_weight() == 0.0
            && self.x.iter().all(|k| matches!(k, Kernel::ExpDecay { .. }))
            && self.y.iter().all(|k| matches!(k, Kernel::ExpDecay { .. }))
    }

    /// `Int_0^t alpha(t,s) ds` in closed form (delta terms at the endpoint
    /// count 1/2). This is the memory coefficient of the averaged-state
    /// equation for commuting-coupling models.
    pub fn alpha_running_integral(&self, t: f64) -> f64 {
        running_integral(&self.x, t) + running_integral(&self.y, t)
    }

    /// `Int_0^t du Int_0^u ds alpha(u,s)` in closed form; the decoherence
    /// exponent builder. Equals `(Var Int x + Var Int y) / 2`.
    pub fn alpha_double_integral(&self, t: f64) -> f64 {
        0.5 * (integrated_variance(&self.x, t) + integrated_variance(&self.y, t))
    }

    /// `Int_0^t (alpha + eta)(t,s) ds = 2 Int_0^t <x_t x_s> ds`: the
    /// time-local memory coefficient multiplying L^2 in the trajectory
    /// drift. For purely white x this is the constant `kappa / 2`.
    pub fn memory_coefficient(&self, t: f64) -> f64 {
        2.0 * running_integral(&self.x, t)
    }

    /// `Int_0^t du (memory coefficient)(u)`: the accumulated drift exponent
    /// of the commuting-coupling propagator. Equals `Var(Int_0^t x ds)`.
    pub fn drift_exponent(&self, t: f64) -> f64 {
        integrated_variance(&self.x, t)
    }
}

/// Outcome of structural validation of a pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairValidation {
    pub accepted: bool,
    pub violations: Vec<String>,
    /// `kappa = 2 * (white weight of x)`.
    pub kappa: f64,
    /// Integrated absolute smooth part of `alpha + eta`.
    pub delta_constraint_residual: f64,
    /// Dimension of the probe covariance that was checked PSD (0 when the
    /// pair has no colored part).
    pub psd_probe_dim: usize,
}

/// Probe-grid size per component for the redundant PSD check.
pub const PSD_PROBE_POINTS: usize = 128;

/// Validate that both components are legitimate autocovariances and that the
/// discretized joint covariance of (x, y) on a coarse probe grid is PSD.
///
/// `probe_t_max` sets the probe-grid span (use the simulation horizon).
pub fn validate_pair(pair: &CorrelationPair, probe_t_max: f64) -> PairValidation {
    let mut violations = Vec::new();
    for k in &pair.x {
        k.violations("x", &mut violations);
    }
    for k in &pair.y {
        k.violations("y", &mut violations);
    }

    let mut psd_probe_dim = 0;
    if violations.is_empty() {
        let n = PSD_PROBE_POINTS;
        let has_colored = !exp_terms(&pair.x).is_empty() || !exp_terms(&pair.y).is_empty();
        if has_colored && probe_t_max > 0.0 {
            let dt = probe_t_max / (n - 1) as f64;
            // joint covariance of (x_0..x_{n-1}, y_0..y_{n-1}); the blocks are
            // independent, giving a block-diagonal 2n x 2n matrix
            let joint = RealSymmetricMatrix::from_fn(2 * n, |i, j| {
                let (ci, ti) = (i / n, (i % n) as f64 * dt);
                let (cj, tj) = (j / n, (j % n) as f64 * dt);
                if ci != cj {
                    return 0.0;
                }
                let comp = if ci == 0 { &pair.x } else { &pair.y };
                smooth_eval(comp, ti - tj)
            });
            psd_probe_dim = 2 * n;
            if let Err(e) = cholesky_psd(&joint) {
                violations.push(format!("probe covariance not PSD: {e}"));
            }
        }
    }

    PairValidation {
        accepted: violations.is_empty(),
        violations,
        kappa: pair.kappa(),
        delta_constraint_residual: pair.delta_constraint_residual(),
        psd_probe_dim,
    }
}
