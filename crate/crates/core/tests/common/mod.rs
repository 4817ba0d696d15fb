//! Shared helpers for integration tests: reference evaluators that read
//! matrix elements through explicit basis kets, and random-state sources.
#![allow(dead_code)]

use entclass::qstate::{matrix_element, CMatrix, DensityMatrix, PureState};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Bit string of length `n` with ones at the listed (0-based) qubits.
pub fn bits(n: usize, ones: &[usize]) -> String {
    (0..n).map(|q| if ones.contains(&q) { '1' } else { '0' }).collect()
}

pub fn complement(s: &str) -> String {
    s.chars().map(|c| if c == '0' { '1' } else { '0' }).collect()
}

pub fn elem(rho: &DensityMatrix, bra: &str, ket: &str) -> C64 {
    let b = PureState::from_bits(bra).unwrap();
    let k = PureState::from_bits(ket).unwrap();
    matrix_element(rho, &b, &k).unwrap()
}

pub fn pop(rho: &DensityMatrix, s: &str) -> f64 {
    elem(rho, s, s).re
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                v.push((i, j));
            }
        }
    }
    v
}

pub fn oracle_in(rho: &DensityMatrix) -> f64 {
    let n = rho.n();
    let alpha = match n {
        3 => 1.5,
        4 => 1.0,
        _ => 0.5,
    };
    let z = bits(n, &[]);
    let o = complement(&z);
    elem(rho, &z, &o).re - alpha * (1.0 - pop(rho, &z) - pop(rho, &o))
}

pub fn oracle_i2(rho: &DensityMatrix) -> f64 {
    let n = rho.n();
    let nf = n as f64;
    let sign = if (n + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let w = |i: usize| bits(n, &[i]);
    let d = |i: usize, j: usize| bits(n, &[i, j]);
    let mut total = 0.0;
    for (i, j) in ordered_pairs(n) {
        total += elem(rho, &w(i), &w(j)).re + sign * elem(rho, &complement(&w(i)), &complement(&w(j))).re;
        total -= pop(rho, &d(i, j)) + pop(rho, &complement(&d(i, j)));
    }
    for i in 0..n {
        total -= (nf - 2.0) * (pop(rho, &w(i)) + pop(rho, &complement(&w(i))));
    }
    let z = bits(n, &[]);
    total - nf * (nf - 1.0) / 2.0 * (pop(rho, &z) + pop(rho, &complement(&z)))
}

pub fn oracle_in_minus1(rho: &DensityMatrix) -> f64 {
    let n = rho.n();
    let nf = n as f64;
    let mut total = 0.0;
    for (i, j) in ordered_pairs(n) {
        total += elem(rho, &bits(n, &[i]), &bits(n, &[j])).re;
        total -= (nf - 2.0) * pop(rho, &bits(n, &[i, j]));
    }
    for i in 0..n {
        total -= (nf - 2.0) * pop(rho, &bits(n, &[i]));
    }
    total - nf * (nf - 1.0) / 2.0 * pop(rho, &bits(n, &[]))
}

pub fn oracle_gme(rho: &DensityMatrix) -> f64 {
    let n = rho.n();
    let z = pop(rho, &bits(n, &[])).max(0.0);
    let mut total = 0.0;
    for (i, j) in ordered_pairs(n) {
        total += elem(rho, &bits(n, &[i]), &bits(n, &[j])).re;
        total -= (z * pop(rho, &bits(n, &[i, j])).max(0.0)).sqrt();
    }
    for i in 0..n {
        total -= (n as f64 - 2.0) * pop(rho, &bits(n, &[i]));
    }
    total
}

/// `G G^dagger / tr` for a complex Gaussian `G`; full rank with probability 1.
pub fn ginibre_density(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1 << n;
    let g: Vec<C64> =
        (0..dim * dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let mut m = CMatrix::from_fn(dim, |r, c| (0..dim).map(|k| g[r * dim + k] * g[c * dim + k].conj()).sum());
    let tr = m.trace().re;
    m = m.scale(1.0 / tr);
    // symmetrize away rounding so validation sees an exactly Hermitian matrix
    let h = CMatrix::from_fn(dim, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    DensityMatrix::from_matrix(h).unwrap()
}

/// Random pure state as a density matrix.
pub fn haar_projector(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let dim = 1 << n;
    let amps: Vec<C64> = (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    entclass::qstate::projector(&PureState::normalized(amps).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalues from nalgebra's Hermitian solver, ascending.
pub fn nalgebra_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let dim = m.dim();
    let a = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
        let z = m[(r, c)];
        nalgebra::Complex::new(z.re, z.im)
    });
    let mut v: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
