//! System models: Hamiltonian, coupling operator, initial state.
//!
//! Presets cover the two-level spin-boson and pure-dephasing models and a
//! truncated harmonic oscillator coupled through its position operator; a
//! custom variant accepts explicit matrices. The Hamiltonian must be
//! Hermitian and the initial state normalized; Hermiticity of the coupling
//! operator is *recorded, not enforced* — non-self-adjoint couplings are
//! legitimate inputs for negative-control experiments, they just void the
//! norm-martingale guarantee.

use thiserror::Error;

use crate::linalg::{ComplexMatrix, StateVector, C64};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const INITIAL_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("Hamiltonian must be square, got {rows}x{cols}")]
    NonSquareHamiltonian { rows: usize, cols: usize },
    #[error("operator dimensions disagree: H is {h}x{h}, L is {l}x{l}, psi0 has {psi} amplitudes")]
    DimensionMismatch { h: usize, l: usize, psi: usize },
    #[error("Hamiltonian is not Hermitian (max |H - H^dag| entry = {deviation:.3e})")]
    NonHermitianHamiltonian { deviation: f64 },
    #[error("initial state must be normalized, got |psi0|^2 = {norm_sq:.12}")]
    UnnormalizedInitialState { norm_sq: f64 },
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    SpinBoson { omega: f64, g: f64 },
    Dephasing { omega: f64, g: f64 },
    Qbm { omega: f64, dim: usize },
    Custom,
}

/// A validated model: Hermitian `h`, coupling `l` (any operator), unit `psi0`.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dim: usize,
    pub h: ComplexMatrix,
    pub l: ComplexMatrix,
    pub psi0: StateVector,
    l_hermiticity_deviation: f64,
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
}

/// Lowering operator |1><0| in the (excited, ground) basis: maps the +1
/// eigenstate of sigma_z to the -1 eigenstate.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]])
}

/// Truncated annihilation operator on a `dim`-level Fock basis:
/// a|n> = sqrt(n)|n-1>.
pub fn lowering(dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Equal superposition (|0> + |1>)/sqrt(2).
fn plus_state() -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(vec![C64::new(r, 0.0), C64::new(r, 0.0)])
}

impl ModelSpec {
    fn build(
        kind: ModelKind,
        h: ComplexMatrix,
        l: ComplexMatrix,
        psi0: StateVector,
    ) -> Result<Self, ModelError> {
        if !h.is_square() {
            return Err(ModelError::NonSquareHamiltonian { rows: h.rows(), cols: h.cols() });
        }
        let dim = h.rows();
        if !l.is_square() || l.rows() != dim || psi0.dim() != dim {
            return Err(ModelError::DimensionMismatch { h: dim, l: l.rows(), psi: psi0.dim() });
        }
        let h_dev = h.hermiticity_deviation();
        if h_dev > HERMITICITY_TOL {
            return Err(ModelError::NonHermitianHamiltonian { deviation: h_dev });
        }
        let norm_sq = psi0.norm_sq();
        if (norm_sq - 1.0).abs() > INITIAL_NORM_TOL {
            return Err(ModelError::UnnormalizedInitialState { norm_sq });
        }
        let l_dev = l.hermiticity_deviation();
        Ok(Self { kind, dim, h, l, psi0, l_hermiticity_deviation: l_dev })
    }

    /// Two-level system H = (omega/2) sigma_z, L = g sigma_x, psi0 = |+>.
    pub fn spin_boson(omega: f64, g: f64) -> Result<Self, ModelError> {
        let h = sigma_z().scale(C64::new(0.5 * omega, 0.0));
        let l = sigma_x().scale(C64::new(g, 0.0));
        Self::build(ModelKind::SpinBoson { omega, g }, h, l, plus_state())
    }

    /// Two-level system H = (omega/2) sigma_z, L = g sigma_z, psi0 = |+>.
    /// H and L commute, so every noise realization is exactly solvable.
    pub fn dephasing(omega: f64, g: f64) -> Result<Self, ModelError> {
        let h = sigma_z().scale(C64::new(0.5 * omega, 0.0));
        let l = sigma_z().scale(C64::new(g, 0.0));
        Self::build(ModelKind::Dephasing { omega, g }, h, l, plus_state())
    }

    /// Harmonic oscillator H = p^2/2 + omega^2 q^2/2 on a `dim`-level Fock
    /// basis, coupled through L = q, starting in the ground state. Operators
    /// are built from truncated ladder matrices, so the top level carries a
    /// truncation artifact; monitor it with [`Self::top_level_occupation`].
    pub fn qbm(omega: f64, dim: usize) -> Result<Self, ModelError> {
        if omega <= 0.0 {
            return Err(ModelError::BadParameter(format!(
                "oscillator frequency must be positive, got {omega}"
            )));
        }
        if dim < 2 {
            return Err(ModelError::BadParameter(format!(
                "oscillator basis needs at least 2 levels, got {dim}"
            )));
        }
        let a = lowering(dim);
        let adag = a.conj_transpose();
        // q = (a + a^dag)/sqrt(2 omega), p = i sqrt(omega/2) (a^dag - a)
        let q = a.add(&adag).scale(C64::new(1.0 / (2.0 * omega).sqrt(), 0.0));
        let p = adag.sub(&a).scale(C64::new(0.0, (omega / 2.0).sqrt()));
        let h = p
            .matmul(&p)
            .scale(C64::new(0.5, 0.0))
            .add(&q.matmul(&q).scale(C64::new(0.5 * omega * omega, 0.0)));
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[0] = C64::new(1.0, 0.0);
        Self::build(ModelKind::Qbm { omega, dim }, h, q, StateVector::new(amps))
    }

    /// Explicit matrices; same validation as the presets.
    pub fn custom(h: ComplexMatrix, l: ComplexMatrix, psi0: StateVector) -> Result<Self, ModelError> {
        Self::build(ModelKind::Custom, h, l, psi0)
    }

    /// Max elementwise |L - L^dag|; zero iff the coupling is self-adjoint.
    pub fn l_hermiticity_deviation(&self) -> f64 {
        self.l_hermiticity_deviation
    }

    pub fn is_l_hermitian(&self) -> bool {
        self.l_hermiticity_deviation <= HERMITICITY_TOL
    }

    /// Fraction of a state's weight in the highest basis level — the
    /// truncation monitor for oscillator models (warn above ~1e-3).
    pub fn top_level_occupation(&self, psi: &StateVector) -> f64 {
        let total = psi.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        psi.amps[self.dim - 1].norm_sqr() / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_boson_matrices() {
        let m = ModelSpec::spin_boson(1.0, 0.5).unwrap();
        assert_eq!(m.dim, 2);
        assert_eq!(m.h[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(m.h[(1, 1)], C64::new(-0.5, 0.0));
        assert_eq!(m.l[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(m.l[(1, 0)], C64::new(0.5, 0.0));
        assert!((m.psi0.norm_sq() - 1.0).abs() < 1e-15);
        assert!(m.is_l_hermitian());
    }

    #[test]
    fn dephasing_coupling_is_diagonal() {
        let m = ModelSpec::dephasing(1.0, 2.0).unwrap();
        assert_eq!(m.l[(0, 0)], C64::new(2.0, 0.0));
        assert_eq!(m.l[(1, 1)], C64::new(-2.0, 0.0));
        assert_eq!(m.l[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn qbm_hamiltonian_is_number_operator_except_top_level() {
        let omega = 2.0;
        let dim = 8;
        let m = ModelSpec::qbm(omega, dim).unwrap();
        assert!(m.h.hermiticity_deviation() < 1e-12);
        // the a^2 / a^dag^2 parts of p^2 and omega^2 q^2 cancel exactly even
        // after truncation, so H is diagonal; diagonal = omega(n + 1/2)
        // except the top level, where the truncated a a^dag loses its
        // contribution: H[d-1][d-1] = omega (d-1)/2.
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    assert!(m.h[(i, j)].norm() < 1e-12, "H[{i}][{j}] = {}", m.h[(i, j)]);
                }
            }
        }
        for n in 0..dim - 1 {
            let want = omega * (n as f64 + 0.5);
            assert!((m.h[(n, n)].re - want).abs() < 1e-12);
        }
        let top = omega * (dim as f64 - 1.0) / 2.0;
        assert!((m.h[(dim - 1, dim - 1)].re - top).abs() < 1e-12);
        // L = q has matrix element <0|q|1> = 1/sqrt(2 omega)
        assert!((m.l[(0, 1)].re - 1.0 / (2.0 * omega).sqrt()).abs() < 1e-14);
        assert!((m.top_level_occupation(&m.psi0) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn custom_rejects_non_hermitian_hamiltonian() {
        let h = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let err = ModelSpec::custom(h, sigma_z(), plus_state()).unwrap_err();
        assert!(matches!(err, ModelError::NonHermitianHamiltonian { .. }));
    }

    #[test]
    fn custom_rejects_unnormalized_initial_state() {
        let psi = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let err = ModelSpec::custom(sigma_z(), sigma_z(), psi).unwrap_err();
        assert!(matches!(err, ModelError::UnnormalizedInitialState { .. }));
    }

    #[test]
    fn non_hermitian_coupling_is_recorded_but_accepted() {
        let m = ModelSpec::custom(sigma_z(), sigma_minus(), plus_state()).unwrap();
        assert!(!m.is_l_hermitian());
        assert!((m.l_hermiticity_deviation() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = ModelSpec::custom(sigma_z(), lowering(3), plus_state()).unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch { .. }));
    }
}
