//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Rotations zero one off-diagonal pair at a time with a complex Givens
//! unitary; sweeps repeat until the off-diagonal Frobenius mass drops below
//! `1e-14` of the matrix norm. Quadratic convergence makes 6-12 sweeps
//! typical. Dimensions in this crate stay at or below 256, where this simple
//! method is both fast enough and free of external-backend nondeterminism.

use super::{C64, ComplexMatrix, LinalgError};

const OFFDIAG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

fn offdiag_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Eigenvalues and eigenvectors of a Hermitian matrix.
///
/// Returns `(values, vectors)` with values ascending and the k-th column of
/// `vectors` the eigenvector for `values[k]`. The input must be Hermitian to
/// `1e-10 * max(1, ||M||_max)`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let dev = m.hermiticity_deviation();
    if dev > 1e-10 * m.norm_max().max(1.0) {
        return Err(LinalgError::NotHermitian { max_dev: dev });
    }
    let n = m.rows();
    let mut a = m.clone();
    // exact symmetrization so rounding in the input cannot bias the sweeps
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * C64::new(0.5, 0.0);
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
        let d = a[(i, i)].re;
        a[(i, i)] = C64::new(d, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.norm_fro().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if offdiag_norm(&a) <= OFFDIAG_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= OFFDIAG_TOL * scale / (n as f64) {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let u = apq / C64::new(r, 0.0); // unit phase of the pivot entry
                let tau = (aqq - app) / (2.0 * r);
                // smaller-magnitude root of t^2 - 2 tau t - 1 = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sigma = t * c;
                let s = u.conj() * C64::new(sigma, 0.0); // rotation J[q][p] entry

                // A <- J^dagger A J with J = I except
                // J[p][p]=c, J[p][q]=-conj(s), J[q][p]=s, J[q][q]=c
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    let new_ip = aip * C64::new(c, 0.0) + aiq * s;
                    let new_iq = aiq * C64::new(c, 0.0) - aip * s.conj();
                    a[(i, p)] = new_ip;
                    a[(p, i)] = new_ip.conj();
                    a[(i, q)] = new_iq;
                    a[(q, i)] = new_iq.conj();
                }
                let new_pp = c * c * app + 2.0 * c * sigma * r + sigma * sigma * aqq;
                let new_qq = sigma * sigma * app - 2.0 * c * sigma * r + c * c * aqq;
                a[(p, p)] = C64::new(new_pp, 0.0);
                a[(q, q)] = C64::new(new_qq, 0.0);
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);

                // accumulate V <- V J
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * C64::new(c, 0.0) + viq * s;
                    v[(i, q)] = viq * C64::new(c, 0.0) - vip * s.conj();
                }
            }
        }
    }
    if !converged && offdiag_norm(&a) > OFFDIAG_TOL * scale {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    // sort ascending, permuting eigenvector columns alongside
    let mut idx: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    idx.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_vals: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in idx.iter().enumerate() {
        for i in 0..n {
            sorted_vecs[(i, new_col)] = v[(i, old_col)];
        }
    }
    Ok((sorted_vals, sorted_vecs))
}

/// Eigenvalues only (ascending).
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    hermitian_eigen(m).map(|(vals, _)| vals)
}
