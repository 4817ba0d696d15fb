use super::eigen::hermitian_eigenvalues;
use super::matrix::CMatrix;
use super::{bit_of, DensityMatrix};
use crate::error::{Error, Result};

/// A split of the qubits `0..n` into two nonempty groups.
///
/// Stored canonically: `part_a` always contains qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n: usize,
    part_a: Vec<usize>,
    mask_a: usize,
}

impl Bipartition {
    pub fn new(n: usize, part: &[usize]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidBipartition(format!("need at least two qubits, got {n}")));
        }
        let mut mask = 0usize;
        for &q in part {
            if q >= n {
                return Err(Error::InvalidBipartition(format!("qubit {q} out of range for n = {n}")));
            }
            if mask & bit_of(n, q) != 0 {
                return Err(Error::InvalidBipartition(format!("qubit {q} listed twice")));
            }
            mask |= bit_of(n, q);
        }
        let full = (1usize << n) - 1;
        if mask == 0 || mask == full {
            return Err(Error::InvalidBipartition("both sides must be nonempty".into()));
        }
        if mask & bit_of(n, 0) == 0 {
            mask = full & !mask;
        }
        let part_a = (0..n).filter(|&q| mask & bit_of(n, q) != 0).collect();
        Ok(Self { n, part_a, mask_a: mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn part_a(&self) -> &[usize] {
        &self.part_a
    }

    pub fn part_b(&self) -> Vec<usize> {
        (0..self.n).filter(|q| !self.part_a.contains(q)).collect()
    }

    /// Basis-index mask with ones on the bits belonging to `part_a`.
    pub fn mask_a(&self) -> usize {
        self.mask_a
    }

    /// All `2^(n-1) - 1` distinct bipartitions of `n` qubits.
    pub fn all(n: usize) -> Vec<Self> {
        let full = (1usize << n) - 1;
        let top = bit_of(n, 0);
        (1..=full)
            .filter(|m| m & top != 0 && *m != full)
            .map(|m| {
                let part: Vec<usize> = (0..n).filter(|&q| m & bit_of(n, q) != 0).collect();
                Self::new(n, &part).expect("enumerated bipartition is valid")
            })
            .collect()
    }
}

/// Transposes the `part_a` tensor factors of `m`.
pub fn partial_transpose(m: &CMatrix, cut: &Bipartition) -> Result<CMatrix> {
    let dim = 1usize << cut.n;
    if m.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
    }
    let mask = cut.mask_a;
    let mut out = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            out[(r2, c2)] = m[(r, c)];
        }
    }
    Ok(out)
}

pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    if cut.n != rho.n() {
        return Err(Error::DimensionMismatch { expected: rho.n(), found: cut.n });
    }
    let pt = partial_transpose(rho.matrix(), cut)?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

/// Positive-partial-transpose test: smallest eigenvalue of the partial
/// transpose is at least `-tol`.
pub fn is_ppt(rho: &DensityMatrix, cut: &Bipartition, tol: f64) -> Result<bool> {
    Ok(min_partial_transpose_eigenvalue(rho, cut)? >= -tol)
}
