//! Dense n-qubit pure states and density matrices.
//!
//! Basis ordering: qubit 0 is the most significant bit of the basis index, so
//! `|q0 q1 ... q_{n-1}>` has index `sum_k q_k 2^(n-1-k)`.

mod eigen;
mod matrix;
mod partial;

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen, EIGEN_HERMITIAN_TOL};
pub use matrix::CMatrix;
pub use partial::{is_ppt, min_partial_transpose_eigenvalue, partial_transpose, Bipartition};

use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_QUBITS: usize = 10;

/// Upper bound on the qubit count; `ENTCLASS_MAX_QUBITS` overrides the default.
pub fn max_qubits() -> usize {
    static MAX: OnceLock<usize> = OnceLock::new();
    *MAX.get_or_init(|| {
        std::env::var("ENTCLASS_MAX_QUBITS")
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&m| m >= 1 && m < usize::BITS as usize / 2)
            .unwrap_or(DEFAULT_MAX_QUBITS)
    })
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    let max = max_qubits();
    if n == 0 || n > max {
        return Err(Error::QubitCount { n, min: 1, max });
    }
    Ok(())
}

/// Basis-index bit of qubit `q` in an `n`-qubit register.
#[inline]
pub fn bit_of(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let n = len.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

fn check_permutation(n: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!("length {} for {n} qubits", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Maps a basis index through a qubit permutation: old qubit `k` lands on
/// position `perm[k]`.
fn permute_index(n: usize, perm: &[usize], idx: usize) -> usize {
    let mut out = 0;
    for (k, &dst) in perm.iter().enumerate() {
        if idx & bit_of(n, k) != 0 {
            out |= bit_of(n, dst);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { n, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm_sq == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        let s = 1.0 / norm_sq.sqrt();
        Self::new(amps.into_iter().map(|z| z * s).collect())
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::OutOfRange(format!("basis index {index} for {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Computational basis state from a bit string such as `"0110"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut idx = 0usize;
        for ch in bits.chars() {
            idx = idx * 2
                + match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Parse(format!("invalid bit {ch:?} in {bits:?}"))),
                };
        }
        Self::basis(bits.len(), idx)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(self.n, perm)?;
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, &z) in self.amps.iter().enumerate() {
            amps[permute_index(self.n, perm, i)] = z;
        }
        Ok(Self { n: self.n, amps })
    }
}

/// Kronecker product of pure states, first factor most significant.
pub fn tensor(states: &[PureState]) -> Result<PureState> {
    let (first, rest) = states.split_first().ok_or(Error::Empty("tensor factor list"))?;
    let n: usize = states.iter().map(PureState::n).sum();
    check_qubits(n)?;
    let mut amps = first.amps.clone();
    for s in rest {
        let mut next = Vec::with_capacity(amps.len() * s.dim());
        for a in &amps {
            next.extend(s.amps.iter().map(|b| a * b));
        }
        amps = next;
    }
    Ok(PureState { n, amps })
}

/// Hermitian, unit-trace, positive semidefinite matrix on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates an arbitrary matrix against every density-matrix invariant,
    /// including positivity (which costs one eigendecomposition).
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        let n = qubits_for_len(m.dim())?;
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr));
        }
        let min = hermitian_eigenvalues(&m)?[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { n, m })
    }

    /// For constructions that preserve the invariants algebraically
    /// (projectors, convex mixtures, unitary conjugation).
    pub(crate) fn from_trusted(n: usize, m: CMatrix) -> Self {
        debug_assert_eq!(m.dim(), 1 << n);
        Self { n, m }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Ok(Self { n, m: CMatrix::identity(dim).scale(1.0 / dim as f64) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.m[(r, c)]
    }

    /// Real part of the diagonal entry `<idx|rho|idx>`.
    #[inline]
    pub fn diag(&self, idx: usize) -> f64 {
        self.m[(idx, idx)].re
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_rc|^2 for Hermitian rho
        self.m.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.m).expect("density matrix is Hermitian")
    }

    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(self.n, perm)?;
        let dim = self.dim();
        let map: Vec<usize> = (0..dim).map(|i| permute_index(self.n, perm, i)).collect();
        let mut out = CMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                out[(map[r], map[c])] = self.m[(r, c)];
            }
        }
        Ok(Self { n: self.n, m: out })
    }
}

/// Rank-one projector `|psi><psi|`.
pub fn projector(state: &PureState) -> DensityMatrix {
    let a = &state.amps;
    let m = CMatrix::from_fn(a.len(), |r, c| a[r] * a[c].conj());
    DensityMatrix::from_trusted(state.n, m)
}

/// Convex combination of density matrices.
pub fn mix(components: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
    let (_, first) = components.first().ok_or(Error::Empty("mixture component list"))?;
    let mut sum = 0.0;
    for &(w, rho) in components {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::InvalidWeights(w));
        }
        if rho.n != first.n {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: rho.dim() });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidWeights(sum));
    }
    let mut m = CMatrix::zeros(first.dim());
    for &(w, rho) in components {
        m.add_scaled(&rho.m, w)?;
    }
    Ok(DensityMatrix::from_trusted(first.n, m))
}

/// `<bra|rho|ket>`
pub fn matrix_element(rho: &DensityMatrix, bra: &PureState, ket: &PureState) -> Result<C64> {
    for s in [bra, ket] {
        if s.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), found: s.dim() });
        }
    }
    let rk = rho.m.matvec(&ket.amps)?;
    Ok(bra.amps.iter().zip(&rk).map(|(b, x)| b.conj() * x).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tensor_of_basis_states() {
        let z = PureState::from_bits("0").unwrap();
        let t = tensor(&[z.clone(), z]).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(t.amplitudes()[0], c(1.0));
    }

    #[test]
    fn tensor_plus_and_one() {
        let plus = PureState::new(vec![c(S), c(S)]).unwrap();
        let one = PureState::from_bits("1").unwrap();
        let t = tensor(&[plus, one]).unwrap();
        let expect = [0.0, S, 0.0, S];
        for (a, e) in t.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_empty() {
        assert!(matches!(tensor(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn projector_of_bell_state() {
        let bell = PureState::new(vec![c(S), c(0.0), c(0.0), c(S)]).unwrap();
        let p = projector(&bell);
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((p.entry(r, col) - c(0.5)).norm() < 1e-15);
        }
        assert!(p.entry(1, 1).norm() == 0.0);
    }

    #[test]
    fn projector_of_zero() {
        let p = projector(&PureState::from_bits("0").unwrap());
        assert_eq!(p.entry(0, 0), c(1.0));
        assert_eq!(p.entry(1, 1), c(0.0));
    }

    #[test]
    fn mix_checks_weights_and_dims() {
        let a = projector(&PureState::from_bits("00").unwrap());
        let b = projector(&PureState::from_bits("11").unwrap());
        let m = mix(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert_eq!(m.diag(0), 0.5);
        assert_eq!(m.diag(3), 0.5);
        assert!(matches!(mix(&[(0.5, &a), (0.4, &b)]), Err(Error::InvalidWeights(_))));
        assert!(matches!(mix(&[(1.0, &a), (0.0, &b)]), Err(Error::InvalidWeights(_))));
        let small = projector(&PureState::from_bits("0").unwrap());
        assert!(matches!(mix(&[(0.5, &a), (0.5, &small)]), Err(Error::DimensionMismatch { .. })));
        assert_eq!(mix(&[(1.0, &a)]).unwrap(), a);
    }

    #[test]
    fn ghz_corner_element() {
        let mut amps = vec![c(0.0); 8];
        amps[0] = c(S);
        amps[7] = c(S);
        let ghz = PureState::new(amps).unwrap();
        let rho = projector(&ghz);
        let bra = PureState::from_bits("000").unwrap();
        let ket = PureState::from_bits("111").unwrap();
        assert!((matrix_element(&rho, &bra, &ket).unwrap() - c(0.5)).norm() < 1e-15);
        let short = PureState::from_bits("00").unwrap();
        assert!(matrix_element(&rho, &short, &ket).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(matches!(PureState::new(vec![c(1.0), c(1.0)]), Err(Error::NotNormalized(_))));
        assert!(matches!(PureState::new(vec![c(1.0); 3]), Err(Error::NotPowerOfTwo(3))));
        assert!(PureState::new(vec![C64::new(f64::NAN, 0.0), c(0.0)]).is_err());
        assert!(PureState::normalized(vec![c(0.0), c(0.0)]).is_err());
        assert!(PureState::from_bits("012").is_err());
    }

    #[test]
    fn density_validation() {
        let mut m = CMatrix::identity(2).scale(0.5);
        assert!(DensityMatrix::from_matrix(m.clone()).is_ok());
        m[(0, 0)] = c(0.6);
        assert!(matches!(DensityMatrix::from_matrix(m.clone()), Err(Error::TraceNotOne(_))));
        let mut m = CMatrix::identity(2).scale(0.5);
        m[(0, 1)] = c(0.1);
        assert!(matches!(DensityMatrix::from_matrix(m), Err(Error::NotHermitian(_))));
        let mut m = CMatrix::zeros(2);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(matches!(DensityMatrix::from_matrix(m), Err(Error::NotPositive(_))));
    }

    #[test]
    fn permutation_moves_qubits() {
        let s = PureState::from_bits("100").unwrap();
        let p = s.permute_qubits(&[2, 0, 1]).unwrap();
        assert_eq!(p, PureState::from_bits("001").unwrap());
        assert!(s.permute_qubits(&[0, 0, 1]).is_err());
        let rho = projector(&s).permute_qubits(&[1, 0, 2]).unwrap();
        assert_eq!(rho, projector(&PureState::from_bits("010").unwrap()));
    }

    #[test]
    fn qubit_cap() {
        assert!(PureState::basis(max_qubits() + 1, 0).is_err());
        assert!(PureState::basis(0, 0).is_err());
    }
}
