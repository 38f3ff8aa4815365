//! Memoryless (GKSL) master-equation reference solver.
//!
//! Builds the Liouvillian of
//!
//! ```text
//! d rho/dt = -i [H, rho] + rate (L rho L^dag - (1/2){L^dag L, rho})
//! ```
//!
//! as a dim^2 x dim^2 matrix acting on the row-major vectorization of rho
//! (using vec(A rho B) = (A (x) B^T) vec(rho)) and propagates with the
//! matrix exponential. This is the limit the colored-noise ensembles must
//! reproduce when every kernel is white with total weight equal to `rate`,
//! and the explicitly *wrong* reference that colored ensembles must beat.

use super::OracleError;
use crate::linalg::{matexp, ComplexMatrix, C64};

/// Largest Hilbert dimension accepted; the superoperator has dim^4 entries.
pub const GKSL_MAX_DIM: usize = 16;

/// Allowed relative trace drift of the propagated solution.
pub const GKSL_TRACE_TOL: f64 = 1e-10;

/// A fixed-rate memoryless evolution: Hamiltonian, single jump operator,
/// nonnegative rate.
#[derive(Debug, Clone)]
pub struct GkslSpec {
    pub h: ComplexMatrix,
    pub l: ComplexMatrix,
    pub rate: f64,
}

impl GkslSpec {
    pub fn new(h: ComplexMatrix, l: ComplexMatrix, rate: f64) -> Result<Self, OracleError> {
        if !h.is_square() || !l.is_square() || h.rows() != l.rows() {
            return Err(OracleError::BadSpec {
                reason: format!(
                    "H is {}x{}, L is {}x{}; both must be square and equal-dimensional",
                    h.rows(),
                    h.cols(),
                    l.rows(),
                    l.cols()
                ),
            });
        }
        if h.rows() > GKSL_MAX_DIM {
            return Err(OracleError::DimTooLarge { dim: h.rows(), cap: GKSL_MAX_DIM });
        }
        if !(rate >= 0.0) {
            return Err(OracleError::BadSpec { reason: format!("rate {rate} < 0") });
        }
        Ok(Self { h, l, rate })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }
}

fn transpose(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.cols(), m.rows());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(j, i)] = m[(i, j)];
        }
    }
    out
}

fn conj_entries(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone();
    for v in out.data_mut() {
        *v = v.conj();
    }
    out
}

fn vec_rho(rho: &ComplexMatrix) -> Vec<C64> {
    rho.data().to_vec()
}

fn unvec_rho(v: &[C64], dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m.data_mut().copy_from_slice(v);
    m
}

/// The generator of the evolution as a dim^2 x dim^2 matrix on row-major
/// vectorized density matrices.
pub fn liouvillian(spec: &GkslSpec) -> ComplexMatrix {
    let d = spec.dim();
    let id = ComplexMatrix::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    // -i (H (x) I - I (x) H^T)
    let mut m = spec.h.kron(&id).sub(&id.kron(&transpose(&spec.h))).scale(minus_i);
    if spec.rate > 0.0 {
        let l_adj_l = spec.l.conj_transpose().matmul(&spec.l);
        // L rho L^dag -> L (x) conj(L)
        let jump = spec.l.kron(&conj_entries(&spec.l));
        let anti = l_adj_l
            .kron(&id)
            .add(&id.kron(&transpose(&l_adj_l)))
            .scale(C64::new(0.5, 0.0));
        m = m.add(&jump.sub(&anti).scale(C64::new(spec.rate, 0.0)));
    }
    m
}

/// True when `times` is `0, dt, 2 dt, ...` for some positive dt.
fn uniform_from_zero(times: &[f64]) -> Option<f64> {
    if times.len() < 2 || times[0].abs() > 1e-12 {
        return None;
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return None;
    }
    for (j, &t) in times.iter().enumerate() {
        if (t - j as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
            return None;
        }
    }
    Some(dt)
}

/// Propagate `rho0` to every time in `times` (each >= 0, any order unless
/// the uniform fast path applies). The trace is checked against its
/// initial value at every output; drift beyond [`GKSL_TRACE_TOL`]
/// (relative) is an error.
pub fn gksl_solve(
    spec: &GkslSpec,
    rho0: &ComplexMatrix,
    times: &[f64],
) -> Result<Vec<ComplexMatrix>, OracleError> {
    let d = spec.dim();
    if !rho0.is_square() || rho0.rows() != d {
        return Err(OracleError::BadSpec {
            reason: format!("initial state is {}x{}, expected {d}x{d}", rho0.rows(), rho0.cols()),
        });
    }
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0)) {
        return Err(OracleError::BadTimes { reason: format!("negative or NaN time {t}") });
    }
    let gen = liouvillian(spec);
    let trace0 = rho0.trace();
    let tol = GKSL_TRACE_TOL * trace0.norm().max(1.0);

    let check = |rho: &ComplexMatrix, t: f64| -> Result<(), OracleError> {
        let drift = (rho.trace() - trace0).norm();
        if drift > tol {
            return Err(OracleError::TraceNotPreserved { t, drift });
        }
        Ok(())
    };

    let mut out = Vec::with_capacity(times.len());
    if let Some(dt) = uniform_from_zero(times) {
        // one matrix exponential, then repeated application to the vector
        let prop = matexp(&gen, dt)?;
        let mut v = vec_rho(rho0);
        for (j, &t) in times.iter().enumerate() {
            if j > 0 {
                v = prop.matvec(&v);
            }
            let rho = unvec_rho(&v, d);
            check(&rho, t)?;
            out.push(rho);
        }
    } else {
        for &t in times {
            let prop = matexp(&gen, t)?;
            let rho = unvec_rho(&prop.matvec(&vec_rho(rho0)), d);
            check(&rho, t)?;
            out.push(rho);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use crate::sse::ModelSpec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus_density() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]])
    }

    #[test]
    fn zero_rate_reduces_to_unitary_evolution() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(0.7, 0.0), c(0.3, -0.2)],
            vec![c(0.3, 0.2), c(-0.7, 0.0)],
        ]);
        let spec = GkslSpec::new(h.clone(), ComplexMatrix::zeros(2, 2), 0.0).unwrap();
        let t = 0.9;
        let rho = gksl_solve(&spec, &plus_density(), &[t]).unwrap().pop().unwrap();
        let u = matexp(&h.scale(c(0.0, -1.0)), t).unwrap();
        let want = u.matmul(&plus_density()).matmul(&u.conj_transpose());
        assert!(rho.sub(&want).norm_max() < 1e-10);
    }

    #[test]
    fn diagonal_coupling_coherence_decays_at_twice_the_rate() {
        let omega = 1.3;
        let model = ModelSpec::dephasing(omega, 1.0).unwrap();
        let rate = 0.5;
        let spec = GkslSpec::new(model.h.clone(), model.l.clone(), rate).unwrap();
        let times = [0.0, 0.5, 1.0, 2.0];
        let sol = gksl_solve(&spec, &plus_density(), &times).unwrap();
        for (rho, &t) in sol.iter().zip(&times) {
            let want = c(0.0, -omega * t).exp() * 0.5 * (-2.0 * rate * t).exp();
            assert!(
                (rho[(0, 1)] - want).norm() < 1e-10,
                "t={t}: {:?} vs {want:?}",
                rho[(0, 1)]
            );
            assert!((rho[(0, 0)].re - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn amplitude_damping_empties_the_decaying_level() {
        let omega = 1.0;
        let rate = 0.8;
        let h = ComplexMatrix::from_real_rows(&[vec![0.5 * omega, 0.0], vec![0.0, -0.5 * omega]]);
        // maps amplitude 0 down to amplitude 1, annihilates amplitude 1
        let lower = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let spec = GkslSpec::new(h, lower, rate).unwrap();
        let sol = gksl_solve(&spec, &plus_density(), &[0.0, 0.7, 1.4]).unwrap();
        for (rho, &t) in sol.iter().zip(&[0.0, 0.7, 1.4]) {
            // population of the decaying level and the coherence, closed form
            assert!((rho[(0, 0)].re - 0.5 * (-rate * t).exp()).abs() < 1e-10);
            let want01 = c(0.0, -omega * t).exp() * 0.5 * (-0.5 * rate * t).exp();
            assert!((rho[(0, 1)] - want01).norm() < 1e-10);
        }
    }

    #[test]
    fn uniform_fast_path_matches_pointwise_exponentials() {
        let model = ModelSpec::qbm(1.0, 4).unwrap();
        let spec = GkslSpec::new(model.h.clone(), model.l.clone(), 0.3).unwrap();
        let rho0 = {
            let mut amps = vec![c(0.5, 0.0); 4];
            amps[1] = c(0.0, 0.5);
            crate::linalg::StateVector::new(amps).outer()
        };
        let times: Vec<f64> = (0..5).map(|j| 0.25 * j as f64).collect();
        let fast = gksl_solve(&spec, &rho0, &times).unwrap();
        for (j, &t) in times.iter().enumerate() {
            let slow = gksl_solve(&spec, &rho0, &[t]).unwrap().pop().unwrap();
            assert!(fast[j].sub(&slow).norm_max() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn trace_and_positivity_hold_along_the_solution() {
        let model = ModelSpec::qbm(1.0, 4).unwrap();
        let lower = crate::sse::model::lowering(4);
        let spec = GkslSpec::new(model.h.clone(), lower, 0.6).unwrap();
        let psi = crate::linalg::StateVector::new(vec![
            c(0.5, 0.0),
            c(0.5, 0.0),
            c(0.0, 0.5),
            c(0.5, 0.0),
        ]);
        let times: Vec<f64> = (0..17).map(|j| 0.5 * j as f64).collect();
        let sol = gksl_solve(&spec, &psi.outer(), &times).unwrap();
        for rho in &sol {
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(rho.hermiticity_deviation() < 1e-9);
            let min = hermitian_eigenvalues(rho)
                .unwrap()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-10, "negative eigenvalue {min}");
        }
        // the damped oscillator relaxes toward its lowest level
        let last = sol.last().unwrap();
        assert!(last[(0, 0)].re > 0.95, "ground population {}", last[(0, 0)].re);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let big = ComplexMatrix::identity(17);
        assert!(matches!(
            GkslSpec::new(big.clone(), big, 1.0),
            Err(OracleError::DimTooLarge { dim: 17, cap: GKSL_MAX_DIM })
        ));
    }
}
