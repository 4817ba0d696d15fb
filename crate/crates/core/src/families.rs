//! Generators for the double, n-tuple and two-excitation Dicke classes, the
//! named reference states, random samplers, and the four-qubit noisy family
//! used by the scanner.

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{apply_local_unitary, LocalUnitaryParams};
use crate::qstate::{
    bit_of, check_qubits, mix, projector, tensor, Bipartition, CMatrix, DensityMatrix, PureState, NORM_TOL,
};

/// Coefficients below this magnitude count as zero.
pub const LAMBDA_ZERO_TOL: f64 = 1e-12;
/// Random coefficient draws are redrawn while any magnitude is below this.
pub const LAMBDA_RESAMPLE_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Per-qubit orthonormal pairs `|x> = a|0> + abar|1>` and its orthogonal
/// partner.
///
/// Two partner conventions are exposed: `y = conj(abar)|0> - conj(a)|1>` and
/// `xbar = -y`. The class generators use `xbar`, which reduces to `|1>` on the
/// computational basis; the two differ by a sign per excited qubit, which the
/// free coefficients of the double and n-tuple classes absorb and which
/// cancels in pairs for the two-excitation states.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    pairs: Vec<(C64, C64)>,
}

impl LocalBasis {
    pub fn new(pairs: Vec<(C64, C64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("local basis"));
        }
        for &(a, abar) in &pairs {
            let norm = a.norm_sqr() + abar.norm_sqr();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized(norm));
            }
        }
        Ok(Self { pairs })
    }

    /// `|x_i> = |0>` on every qubit.
    pub fn computational(n: usize) -> Self {
        Self { pairs: vec![(ONE, ZERO); n] }
    }

    /// `|x_i> = |1>` on every qubit.
    pub fn flipped(n: usize) -> Self {
        Self { pairs: vec![(ZERO, ONE); n] }
    }

    /// Uniform on the unit sphere of C^2 for every qubit.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let pairs = (0..n)
            .map(|_| loop {
                let a = gaussian_c64(rng);
                let b = gaussian_c64(rng);
                let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
                if norm > 1e-300 {
                    break (a / norm, b / norm);
                }
            })
            .collect();
        Self { pairs }
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, i: usize) -> (C64, C64) {
        self.pairs[i]
    }

    pub fn x(&self, i: usize) -> [C64; 2] {
        let (a, abar) = self.pairs[i];
        [a, abar]
    }

    pub fn y(&self, i: usize) -> [C64; 2] {
        let (a, abar) = self.pairs[i];
        [abar.conj(), -a.conj()]
    }

    pub fn xbar(&self, i: usize) -> [C64; 2] {
        let (a, abar) = self.pairs[i];
        [-abar.conj(), a.conj()]
    }
}

/// Product state from one single-qubit vector per qubit (qubit 0 first).
fn product(factors: &[[C64; 2]]) -> Vec<C64> {
    let n = factors.len();
    (0..1usize << n)
        .map(|idx| factors.iter().enumerate().map(|(q, f)| f[usize::from(idx & bit_of(n, q) != 0)]).product())
        .collect()
}

/// Product with `xbar` on the qubits in `flipped` and `x` elsewhere.
fn excitation(basis: &LocalBasis, flipped: &[usize]) -> Vec<C64> {
    let factors: Vec<[C64; 2]> =
        (0..basis.n()).map(|q| if flipped.contains(&q) { basis.xbar(q) } else { basis.x(q) }).collect();
    product(&factors)
}

fn check_lambdas(lambdas: &[C64], expected: usize) -> Result<()> {
    if lambdas.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: lambdas.len() });
    }
    for (index, l) in lambdas.iter().enumerate() {
        if l.norm().is_nan() || l.norm() <= LAMBDA_ZERO_TOL {
            return Err(Error::ZeroCoefficient { index, magnitude: l.norm() });
        }
    }
    let norm: f64 = lambdas.iter().map(|l| l.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

fn add_into(acc: &mut [C64], v: &[C64], w: C64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
}

/// `l1 |x_1 ... x_n> + l2 |xbar_1 ... xbar_n>`
pub fn make_double(basis: &LocalBasis, lambdas: [C64; 2]) -> Result<PureState> {
    let n = basis.n();
    if n < 2 {
        return Err(Error::QubitCount { n, min: 2, max: crate::qstate::max_qubits() });
    }
    check_qubits(n)?;
    check_lambdas(&lambdas, 2)?;
    let all: Vec<usize> = (0..n).collect();
    let mut amps = vec![ZERO; 1 << n];
    add_into(&mut amps, &excitation(basis, &[]), lambdas[0]);
    add_into(&mut amps, &excitation(basis, &all), lambdas[1]);
    PureState::new(amps)
}

/// `sum_i l_i |W_i>` where `|W_i>` flips qubit `i` to `xbar_i`.
pub fn make_ntuple(basis: &LocalBasis, lambdas: &[C64]) -> Result<PureState> {
    let n = basis.n();
    if n < 2 {
        return Err(Error::QubitCount { n, min: 2, max: crate::qstate::max_qubits() });
    }
    check_qubits(n)?;
    check_lambdas(lambdas, n)?;
    let mut amps = vec![ZERO; 1 << n];
    for (i, &l) in lambdas.iter().enumerate() {
        add_into(&mut amps, &excitation(basis, &[i]), l);
    }
    PureState::new(amps)
}

/// Equal superposition of all two-excitation products `|D_ij>`, `i < j`.
pub fn make_dicke2(n: usize, basis: &LocalBasis) -> Result<PureState> {
    if n < 3 {
        return Err(Error::QubitCount { n, min: 3, max: crate::qstate::max_qubits() });
    }
    check_qubits(n)?;
    if basis.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: basis.n() });
    }
    let w = C64::new((2.0 / (n * (n - 1)) as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; 1 << n];
    for i in 0..n {
        for j in (i + 1)..n {
            add_into(&mut amps, &excitation(basis, &[i, j]), w);
        }
    }
    PureState::new(amps)
}

/// `(|0...0> + |1...1>)/sqrt(2)`
pub fn ghz(n: usize) -> Result<PureState> {
    let l = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    make_double(&LocalBasis::computational(n), [l, l])
}

/// Symmetric single-excitation state.
pub fn w_state(n: usize) -> Result<PureState> {
    let l = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    make_ntuple(&LocalBasis::computational(n), &vec![l; n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateClass {
    Double,
    NTuple,
    Dicke2,
}

impl StateClass {
    pub const ALL: [StateClass; 3] = [StateClass::Double, StateClass::NTuple, StateClass::Dicke2];

    pub fn label(self) -> &'static str {
        match self {
            StateClass::Double => "double",
            StateClass::NTuple => "n-tuple",
            StateClass::Dicke2 => "(n-1)-tuple",
        }
    }
}

/// A concrete member of one of the three classes.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassStateSpec {
    Double { basis: LocalBasis, lambdas: [C64; 2] },
    NTuple { basis: LocalBasis, lambdas: Vec<C64> },
    Dicke2 { basis: LocalBasis },
}

impl ClassStateSpec {
    pub fn class(&self) -> StateClass {
        match self {
            ClassStateSpec::Double { .. } => StateClass::Double,
            ClassStateSpec::NTuple { .. } => StateClass::NTuple,
            ClassStateSpec::Dicke2 { .. } => StateClass::Dicke2,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ClassStateSpec::Double { basis, .. }
            | ClassStateSpec::NTuple { basis, .. }
            | ClassStateSpec::Dicke2 { basis } => basis.n(),
        }
    }

    pub fn state(&self) -> Result<PureState> {
        match self {
            ClassStateSpec::Double { basis, lambdas } => make_double(basis, *lambdas),
            ClassStateSpec::NTuple { basis, lambdas } => make_ntuple(basis, lambdas),
            ClassStateSpec::Dicke2 { basis } => make_dicke2(basis.n(), basis),
        }
    }

    /// Random member with a random local basis and random coefficients.
    pub fn random<R: Rng + ?Sized>(class: StateClass, n: usize, rng: &mut R) -> Self {
        let basis = LocalBasis::random(n, rng);
        match class {
            StateClass::Double => {
                let l = random_lambdas(2, rng);
                ClassStateSpec::Double { basis, lambdas: [l[0], l[1]] }
            }
            StateClass::NTuple => ClassStateSpec::NTuple { basis, lambdas: random_lambdas(n, rng) },
            StateClass::Dicke2 => ClassStateSpec::Dicke2 { basis },
        }
    }
}

/// Complex Gaussian coefficients, normalized, with no magnitude below
/// [`LAMBDA_RESAMPLE_TOL`].
pub fn random_lambdas<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..k).map(|_| gaussian_c64(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
        if v.iter().all(|z| z.norm() >= LAMBDA_RESAMPLE_TOL) {
            return v;
        }
    }
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Uniform point on the probability simplex (normalized exponentials).
pub fn simplex_weights<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..count).map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    check_qubits(n)?;
    PureState::normalized((0..1usize << n).map(|_| gaussian_c64(rng)).collect())
}

/// Full-rank random density matrix `G G^dagger / Tr(G G^dagger)` with `G`
/// complex Ginibre.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let g = CMatrix::from_fn(dim, |_, _| gaussian_c64(rng));
    let gg = g.matmul(&g.adjoint())?;
    let tr = gg.trace().re;
    let m = CMatrix::from_fn(dim, |r, c| 0.5 * (gg[(r, c)] + gg[(c, r)].conj()) / tr);
    Ok(DensityMatrix::from_trusted(n, m))
}

/// Random pure product over the given blocks of qubits: Haar-random on each
/// block, placed at the listed qubit positions.
pub fn random_block_product<R: Rng + ?Sized>(n: usize, blocks: &[Vec<usize>], rng: &mut R) -> Result<PureState> {
    let order: Vec<usize> = blocks.iter().flatten().copied().collect();
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() || blocks.iter().any(Vec::is_empty) {
        return Err(Error::InvalidBipartition(format!("{blocks:?} does not partition 0..{n}")));
    }
    let factors = blocks.iter().map(|b| random_pure(b.len(), rng)).collect::<Result<Vec<_>>>()?;
    // position k of the tensor product holds qubit order[k]
    tensor(&factors)?.permute_qubits(&order)
}

/// Convex mixture of `count` random members of `class`, each with its own
/// local basis, coefficients and qubit permutation.
pub fn sample_class_mixture(class: StateClass, n: usize, count: usize, seed: u64) -> Result<DensityMatrix> {
    sample_class_mixture_with(class, n, count, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_class_mixture_with<R: Rng + ?Sized>(
    class: StateClass,
    n: usize,
    count: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if count == 0 {
        return Err(Error::Empty("mixture count"));
    }
    let weights = simplex_weights(count, rng);
    let members = (0..count)
        .map(|_| {
            let spec = ClassStateSpec::random(class, n, rng);
            let perm = random_permutation(n, rng);
            Ok(projector(&spec.state()?.permute_qubits(&perm)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<(f64, &DensityMatrix)> = weights.iter().copied().zip(members.iter()).collect();
    mix(&parts)
}

/// Convex mixture of `count` pure states, each a product of Haar-random states
/// on the two sides of a uniformly chosen bipartition.
pub fn sample_biseparable(n: usize, count: usize, seed: u64) -> Result<DensityMatrix> {
    sample_biseparable_with(n, count, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_biseparable_with<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::QubitCount { n, min: 2, max: crate::qstate::max_qubits() });
    }
    if count == 0 {
        return Err(Error::Empty("mixture count"));
    }
    let cuts = Bipartition::all(n);
    let weights = simplex_weights(count, rng);
    let members = (0..count)
        .map(|_| {
            let cut = &cuts[rng.random_range(0..cuts.len())];
            let blocks = vec![cut.part_a().to_vec(), cut.part_b()];
            Ok(projector(&random_block_product(n, &blocks, rng)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<(f64, &DensityMatrix)> = weights.iter().copied().zip(members.iter()).collect();
    mix(&parts)
}

/// One component of an explicit mixture.
#[derive(Debug, Clone)]
pub struct MixComponent {
    pub weight: f64,
    pub source: StateSource,
    pub local_unitary: Option<LocalUnitaryParams>,
    pub permutation: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub enum StateSource {
    Class(ClassStateSpec),
    Pure(PureState),
}

/// `sum_i p_i U_i Pi_i |psi_i><psi_i| Pi_i^dagger U_i^dagger`
#[derive(Debug, Clone, Default)]
pub struct MixSpec {
    pub components: Vec<MixComponent>,
}

impl MixSpec {
    pub fn build(&self) -> Result<DensityMatrix> {
        let members = self
            .components
            .iter()
            .map(|c| {
                let mut psi = match &c.source {
                    StateSource::Class(spec) => spec.state()?,
                    StateSource::Pure(p) => p.clone(),
                };
                if let Some(perm) = &c.permutation {
                    psi = psi.permute_qubits(perm)?;
                }
                let rho = projector(&psi);
                match &c.local_unitary {
                    Some(u) => apply_local_unitary(&rho, u),
                    None => Ok(rho),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(f64, &DensityMatrix)> = self.components.iter().map(|c| c.weight).zip(members.iter()).collect();
        mix(&parts)
    }
}

/// `alpha |GHZ_4><GHZ_4| + beta |W_4><W_4| + (1 - alpha - beta) 1/16`
pub fn ghz_w_noise_family(alpha: f64, beta: f64) -> Result<DensityMatrix> {
    const SLACK: f64 = 1e-12;
    if !(alpha >= 0.0 && beta >= 0.0 && alpha + beta <= 1.0 + SLACK) {
        return Err(Error::OutOfRange(format!("(alpha, beta) = ({alpha}, {beta}) outside the simplex")));
    }
    let noise = (1.0 - alpha - beta).max(0.0) / 16.0;
    let g = projector(&ghz(4)?);
    let w = projector(&w_state(4)?);
    let mut m = CMatrix::identity(16).scale(noise);
    m.add_scaled(g.matrix(), alpha)?;
    m.add_scaled(w.matrix(), beta)?;
    Ok(DensityMatrix::from_trusted(4, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn partner_is_orthogonal_exactly() {
        let b = LocalBasis::random(6, &mut rng());
        for i in 0..6 {
            let x = b.x(i);
            for p in [b.y(i), b.xbar(i)] {
                let ip = p[0].conj() * x[0] + p[1].conj() * x[1];
                assert_eq!(ip, c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn local_basis_rejects_unnormalized() {
        assert!(LocalBasis::new(vec![(c(1.0, 0.0), c(1.0, 0.0))]).is_err());
        assert!(LocalBasis::new(vec![]).is_err());
    }

    #[test]
    fn ghz_amplitudes_exact() {
        for n in 2..=6 {
            let g = ghz(n).unwrap();
            let a = g.amplitudes();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            assert_eq!(a[0], c(s, 0.0));
            assert_eq!(a[(1 << n) - 1], c(s, 0.0));
            assert_eq!(a.iter().filter(|z| z.norm() != 0.0).count(), 2);
        }
    }

    #[test]
    fn double_rejects_zero_lambda() {
        let b = LocalBasis::computational(3);
        assert!(matches!(make_double(&b, [c(1.0, 0.0), c(0.0, 0.0)]), Err(Error::ZeroCoefficient { index: 1, .. })));
    }

    #[test]
    fn w3_and_phi2() {
        let w = w_state(3).unwrap();
        let t = 1.0 / 3f64.sqrt();
        for (i, a) in w.amplitudes().iter().enumerate() {
            let expect = if [1, 2, 4].contains(&i) { t } else { 0.0 };
            assert!((a - c(expect, 0.0)).norm() < 1e-15);
        }
        let phi2 = w_state(4).unwrap();
        for (i, a) in phi2.amplitudes().iter().enumerate() {
            let expect = if i.count_ones() == 1 { 0.5 } else { 0.0 };
            assert_eq!(*a, c(expect, 0.0));
        }
    }

    #[test]
    fn ntuple_components_orthogonal() {
        let mut r = rng();
        let b = LocalBasis::random(5, &mut r);
        let comps: Vec<PureState> = (0..5).map(|i| PureState::new(excitation(&b, &[i])).unwrap()).collect();
        for i in 0..5 {
            for j in 0..5 {
                let ip = comps[i].inner(&comps[j]).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dicke_computational() {
        let d4 = make_dicke2(4, &LocalBasis::computational(4)).unwrap();
        let s = 1.0 / 6f64.sqrt();
        for (i, a) in d4.amplitudes().iter().enumerate() {
            let expect = if i.count_ones() == 2 { s } else { 0.0 };
            assert!((a - c(expect, 0.0)).norm() < 1e-15);
        }
        let d3 = make_dicke2(3, &LocalBasis::computational(3)).unwrap();
        let t = 1.0 / 3f64.sqrt();
        for idx in [0b011, 0b101, 0b110] {
            assert!((d3.amplitudes()[idx] - c(t, 0.0)).norm() < 1e-15);
        }
        assert!(make_dicke2(2, &LocalBasis::computational(2)).is_err());
        let b = LocalBasis::random(5, &mut rng());
        assert!((make_dicke2(5, &b).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_w_noise_corners() {
        let mm = ghz_w_noise_family(0.0, 0.0).unwrap();
        assert!(mm.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).unwrap().matrix()) < 1e-16);
        let g = ghz_w_noise_family(1.0, 0.0).unwrap();
        assert!(g.matrix().max_abs_diff(projector(&ghz(4).unwrap()).matrix()) < 1e-16);
        assert!(ghz_w_noise_family(0.7, 0.4).is_err());
        assert!(ghz_w_noise_family(-0.1, 0.4).is_err());
    }

    #[test]
    fn samplers_reproducible() {
        let a = sample_class_mixture(StateClass::NTuple, 4, 3, 11).unwrap();
        let b = sample_class_mixture(StateClass::NTuple, 4, 3, 11).unwrap();
        assert_eq!(a, b);
        let a = sample_biseparable(4, 5, 3).unwrap();
        let b = sample_biseparable(4, 5, 3).unwrap();
        assert_eq!(a, b);
        assert!(sample_class_mixture(StateClass::Double, 3, 0, 1).is_err());
    }

    #[test]
    fn single_member_is_pure() {
        for class in StateClass::ALL {
            let rho = sample_class_mixture(class, 4, 1, 5).unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_split_is_product() {
        let mut r = rng();
        let blocks: Vec<Vec<usize>> = (0..4).map(|q| vec![q]).collect();
        let psi = random_block_product(4, &blocks, &mut r).unwrap();
        let rho = projector(&psi);
        for cut in Bipartition::all(4) {
            // pure product state: every reduced state is pure, so the partial
            // transpose stays positive
            assert!(crate::qstate::is_ppt(&rho, &cut, 1e-10).unwrap());
        }
        assert!(random_block_product(3, &[vec![0], vec![2]], &mut r).is_err());
    }

    #[test]
    fn mix_spec_applies_transformations() {
        let spec = MixSpec {
            components: vec![
                MixComponent {
                    weight: 0.5,
                    source: StateSource::Pure(PureState::from_bits("100").unwrap()),
                    local_unitary: None,
                    permutation: Some(vec![2, 1, 0]),
                },
                MixComponent {
                    weight: 0.5,
                    source: StateSource::Class(ClassStateSpec::Dicke2 { basis: LocalBasis::computational(3) }),
                    local_unitary: Some(LocalUnitaryParams::identity(3)),
                    permutation: None,
                },
            ],
        };
        let rho = spec.build().unwrap();
        assert!((rho.diag(0b001) - 0.5).abs() < 1e-15);
        assert!((rho.diag(0b011) - 0.5 / 3.0).abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}
