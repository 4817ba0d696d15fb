//! Hermitian eigensolver based on cyclic complex Jacobi rotations.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies an ordinary real Jacobi rotation to the resulting
//! real symmetric 2x2 block. Sweeps continue until the off-diagonal Frobenius
//! norm is negligible relative to the full norm.

use num_complex::Complex64 as C64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Inputs whose Hermiticity defect exceeds this are rejected.
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, ordered like `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|r| self.vectors[(r, k)]).collect()
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(m, false)?.values)
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    jacobi(m, true)
}

fn off_norm_sq(a: &CMatrix) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi(m: &CMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = m.hermiticity_defect();
    if defect > EIGEN_HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let d = m.dim();
    // Symmetrize so rounding in the input cannot bias the rotations.
    let mut a =
        CMatrix::from_fn(
            d,
            |r, c| {
                if r == c {
                    C64::new(m[(r, r)].re, 0.0)
                } else {
                    0.5 * (m[(r, c)] + m[(c, r)].conj())
                }
            },
        );
    let mut v = if want_vectors { CMatrix::identity(d) } else { CMatrix::zeros(0) };

    let total: f64 = a.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let threshold = (f64::EPSILON * f64::EPSILON) * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_norm_sq(&a) <= threshold {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on the (p, q) plane.
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -s * phase.conj();
                let jqq = c * phase.conj();

                // A <- A J
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A <- J^H A
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(app - t * r, 0.0);
                a[(q, q)] = C64::new(aqq + t * r, 0.0);

                if want_vectors {
                    for k in 0..d {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * jpp + vkq * jqp;
                        v[(k, q)] = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors { CMatrix::from_fn(d, |r, k| v[(r, order[k])]) } else { CMatrix::zeros(0) };
    Ok(HermitianEigen { values, vectors })
}
