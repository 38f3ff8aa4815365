//! LU factorization with partial pivoting for dense complex matrices.
//!
//! Backs the Padé solve inside [`super::expm::matexp`] and the propagator
//! composition `A(s -> t) = G_t G_s^{-1}`, where a condition-number estimate
//! guards against meaningless inverses.

use super::{C64, ComplexMatrix, LinalgError};

/// LU factors of a square matrix, `P A = L U` with unit-diagonal `L`.
pub struct LuFactors {
    n: usize,
    /// Combined storage: strict lower triangle holds L, upper triangle holds U.
    lu: Vec<C64>,
    /// Row permutation: `perm[i]` is the original row now in position `i`.
    perm: Vec<usize>,
}

/// Factor `a`; fails if a pivot is exactly zero (structurally singular).
pub fn lu_factor(a: &ComplexMatrix) -> Result<LuFactors, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut lu: Vec<C64> = a.data().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // partial pivot: largest magnitude in column k at or below the diagonal
        let mut p = k;
        let mut pmax = lu[k * n + k].norm();
        for i in (k + 1)..n {
            let m = lu[i * n + k].norm();
            if m > pmax {
                pmax = m;
                p = i;
            }
        }
        if pmax == 0.0 {
            return Err(LinalgError::Singular { cond: f64::INFINITY, cap: f64::INFINITY });
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = lu[k * n + k];
        for i in (k + 1)..n {
            let factor = lu[i * n + k] / pivot;
            lu[i * n + k] = factor;
            for j in (k + 1)..n {
                let ukj = lu[k * n + j];
                lu[i * n + j] -= factor * ukj;
            }
        }
    }
    Ok(LuFactors { n, lu, perm })
}

impl LuFactors {
    /// Solve `A x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // apply permutation, then forward/back substitution
        let mut x: Vec<C64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solve `A X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.n);
        let mut out = ComplexMatrix::zeros(self.n, b.cols());
        let mut col = vec![C64::new(0.0, 0.0); self.n];
        for j in 0..b.cols() {
            for i in 0..self.n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_matrix(&ComplexMatrix::identity(self.n))
    }
}

/// Condition-number estimate in the 1-norm, `||A||_1 ||A^{-1}||_1`, via the
/// explicit inverse (matrices here are at most a few hundred rows).
pub fn condition_estimate(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    let f = lu_factor(a)?;
    Ok(a.norm_one() * f.inverse().norm_one())
}
