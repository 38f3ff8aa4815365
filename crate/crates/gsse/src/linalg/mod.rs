//! Dense complex linear algebra sized for small quantum systems.
//!
//! Everything here is deliberately self-contained and single-threaded: the
//! matrices are small (Hilbert dimensions up to ~64, superoperators up to
//! 256x256), and the ensemble layer's bit-reproducibility contract demands
//! arithmetic whose result does not depend on worker count or a BLAS
//! backend's internal threading.
//!
//! The three operations with numerical contracts live in submodules:
//! [`expm::matexp`] (scaling-and-squaring Padé), [`cholesky::cholesky_psd`]
//! (positive-semidefinite Cholesky with diagonal jitter escalation), and
//! [`trace_distance`] (via the Hermitian Jacobi eigensolver in [`eigen`]).

pub mod cholesky;
pub mod eigen;
pub mod expm;
pub mod lu;

pub use cholesky::{cholesky_psd, PsdCholesky};
pub use eigen::{hermitian_eigen, hermitian_eigenvalues};
pub use expm::matexp;
pub use lu::{condition_estimate, lu_factor, LuFactors};

use num_complex::Complex64;
use thiserror::Error;

/// Shorthand for the complex scalar used everywhere in this crate.
pub type C64 = Complex64;

/// Errors reported by the linear-algebra layer. All failures are values —
/// nothing in this module panics on bad numerical input.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("matrix exceeds size cap: {entries} entries > {cap}")]
    TooLarge { entries: usize, cap: usize },
    #[error("matrix is not Hermitian (max |M - M^dagger| = {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },
    #[error(
        "matrix is not positive semidefinite \
         (most negative eigenvalue estimate {min_eig:.6e}, jitter tried up to {max_jitter:.3e})"
    )]
    NotPositiveSemiDefinite { min_eig: f64, max_jitter: f64 },
    #[error("matrix is numerically singular (condition estimate {cond:.3e} > {cap:.3e})")]
    Singular { cond: f64, cap: f64 },
    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    /// Build a square matrix from real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let complex: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, f: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= f;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    /// Kronecker product `self (x) other`, used to assemble superoperators.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from Hermitian symmetry, `max |M - M^dagger|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Unnormalized pure state (amplitudes in a fixed orthonormal basis).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescale to unit norm; returns an error context string if the norm is
    /// numerically zero.
    pub fn normalized(&self) -> Result<Self, LinalgError> {
        let n = self.norm_sq().sqrt();
        if n < 1e-300 {
            return Err(LinalgError::DimensionMismatch {
                context: "cannot normalize a zero state".into(),
            });
        }
        Ok(Self { amps: self.amps.iter().map(|a| a / n).collect() })
    }

    /// Outer product |psi><psi| (unnormalized).
    pub fn outer(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        m
    }
}

/// Dense real symmetric matrix (noise covariance blocks). Stored full,
/// row-major; symmetry is the constructor's responsibility and is checked
/// where contracts need it.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealSymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn max_abs_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = C64::new(self.get(i, j), 0.0);
            }
        }
        m
    }
}

/// Trace distance `(1/2) sum_i |lambda_i(rho1 - rho2)|` between Hermitian
/// matrices of equal dimension.
///
/// Both inputs must be Hermitian to `1e-10 * max(1, norm)`; the difference is
/// diagonalized with the Jacobi eigensolver.
pub fn trace_distance(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !rho1.is_square() {
        return Err(LinalgError::NotSquare { rows: rho1.rows(), cols: rho1.cols() });
    }
    if rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols() {
        return Err(LinalgError::DimensionMismatch {
            context: format!(
                "trace_distance between {}x{} and {}x{}",
                rho1.rows(),
                rho1.cols(),
                rho2.rows(),
                rho2.cols()
            ),
        });
    }
    for m in [rho1, rho2] {
        let dev = m.hermiticity_deviation();
        if dev > 1e-10 * m.norm_max().max(1.0) {
            return Err(LinalgError::NotHermitian { max_dev: dev });
        }
    }
    let diff = rho1.sub(rho2);
    let eigs = eigen::hermitian_eigenvalues(&diff)?;
    Ok(0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_and_adjoint_basics() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(2.0, -1.0), c(0.0, 0.0)],
        ]);
        let id = ComplexMatrix::identity(2);
        assert_eq!(a.matmul(&id), a);
        let adj = a.conj_transpose();
        assert_eq!(adj[(0, 1)], c(2.0, 1.0));
        assert_eq!(adj[(1, 0)], c(0.0, -1.0));
    }

    #[test]
    fn kron_shapes_and_values() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = ComplexMatrix::identity(2);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(1, 3)], c(2.0, 0.0));
        assert_eq!(k[(2, 0)], c(3.0, 0.0));
        assert_eq!(k[(3, 3)], c(4.0, 0.0));
    }

    #[test]
    fn trace_distance_of_identical_states_is_zero() {
        let rho = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-14);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let p0 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let p1 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]);
        let d = trace_distance(&p0, &p1).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn trace_distance_rejects_non_hermitian() {
        let bad = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let rho = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(matches!(
            trace_distance(&bad, &rho),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_distance_symmetry_and_triangle_on_density_matrices() {
        // Hand-built density matrices: mixtures of |0>, |+> and a phase-rotated state.
        let mk = |p: f64, phase: f64| {
            let amp = StateVector::new(vec![
                c((1.0 - p).sqrt(), 0.0),
                c(p.sqrt() * phase.cos(), p.sqrt() * phase.sin()),
            ]);
            amp.outer()
        };
        let a = mk(0.2, 0.0);
        let b = mk(0.7, 1.1);
        let cden = mk(0.5, -0.4);
        let dab = trace_distance(&a, &b).unwrap();
        let dba = trace_distance(&b, &a).unwrap();
        let dac = trace_distance(&a, &cden).unwrap();
        let dcb = trace_distance(&cden, &b).unwrap();
        assert!((dab - dba).abs() < 1e-13);
        assert!(dab <= dac + dcb + 1e-12);
        assert!(dab <= 1.0 + 1e-12);
    }

    #[test]
    fn state_norm_and_outer() {
        let s = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);
        let rho = s.outer();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!(rho.is_hermitian(1e-15));
    }
}
