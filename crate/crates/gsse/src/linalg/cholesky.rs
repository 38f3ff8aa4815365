//! Cholesky factorization for positive-semidefinite real matrices.
//!
//! Noise covariance matrices on fine grids are PSD in exact arithmetic but
//! often lose definiteness at roundoff level (nearly identical neighboring
//! rows). The factorization therefore escalates a diagonal jitter through
//! `{0, 1e-12, 1e-10} * max|diag|` and accepts the first factor whose
//! reconstruction error `||L L^T - C||_max` stays within `1e-8 ||C||_max`.
//! Genuine indefiniteness fails with the most negative eigenvalue estimate
//! attached — a value, not a panic.

use super::eigen::hermitian_eigenvalues;
use super::{LinalgError, RealSymmetricMatrix};

/// Relative jitter ladder applied to the diagonal before each attempt.
pub const JITTER_LADDER: [f64; 3] = [0.0, 1e-12, 1e-10];

/// Relative reconstruction tolerance for accepting a factor.
pub const RECONSTRUCTION_RTOL: f64 = 1e-8;

/// Successful PSD Cholesky: `C + jitter * I = L L^T` (within tolerance),
/// with `L` lower-triangular, stored row-major and full.
#[derive(Debug, Clone)]
pub struct PsdCholesky {
    n: usize,
    l: Vec<f64>,
    /// Diagonal jitter that was actually added (0.0 on clean inputs).
    pub jitter: f64,
}

impl PsdCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Apply `L` to a standard-normal vector: the resulting vector has
    /// covariance `C + jitter I`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.l[i * self.n + j] * z[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn reconstruction(&self) -> RealSymmetricMatrix {
        let n = self.n;
        RealSymmetricMatrix::from_fn(n, |i, j| {
            let mut acc = 0.0;
            for k in 0..=j.min(i) {
                acc += self.l[i * n + k] * self.l[j * n + k];
            }
            acc
        })
    }
}

/// One factorization attempt with a fixed jitter. Negative pivots are
/// clamped to zero (semidefinite handling); quality is judged afterwards by
/// reconstruction error.
fn attempt(c: &RealSymmetricMatrix, jitter: f64) -> PsdCholesky {
    let n = c.dim();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = c.get(j, j) + jitter;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d > 0.0 {
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut acc = c.get(i, j);
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = acc / ljj;
            }
        } else {
            // zero pivot: leave the column empty; the reconstruction check
            // decides whether that was legitimate (exact rank deficiency)
            l[j * n + j] = 0.0;
        }
    }
    PsdCholesky { n, l, jitter }
}

/// Factor a positive-semidefinite matrix, escalating diagonal jitter.
///
/// On success, `||L L^T - C||_max <= 1e-8 ||C||_max` (the jitter itself is at
/// most `1e-10 max|diag|`, inside that budget). On failure, the error carries
/// the most negative eigenvalue estimate from the Jacobi eigensolver.
pub fn cholesky_psd(c: &RealSymmetricMatrix) -> Result<PsdCholesky, LinalgError> {
    let n = c.dim();
    if n == 0 {
        return Ok(PsdCholesky { n: 0, l: vec![], jitter: 0.0 });
    }
    let scale = c.norm_max();
    if scale == 0.0 {
        // the zero matrix is PSD with L = 0
        return Ok(PsdCholesky { n, l: vec![0.0; n * n], jitter: 0.0 });
    }
    let max_diag = c.max_abs_diag();
    let mut max_jitter = 0.0;
    for rel in JITTER_LADDER {
        let jitter = rel * max_diag;
        max_jitter = jitter;
        let fac = attempt(c, jitter);
        let rec = fac.reconstruction();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                err = err.max((rec.get(i, j) - c.get(i, j)).abs());
            }
        }
        if err <= RECONSTRUCTION_RTOL * scale {
            return Ok(fac);
        }
    }
    let min_eig = hermitian_eigenvalues(&c.to_complex())
        .map(|v| v.first().copied().unwrap_or(f64::NAN))
        .unwrap_or(f64::NAN);
    Err(LinalgError::NotPositiveSemiDefinite { min_eig, max_jitter })
}
