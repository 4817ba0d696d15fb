//! Maximizing an inequality's left-hand side over local unitaries
//! `U_1 (x) ... (x) U_n`.

mod nelder_mead;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use nelder_mead::{minimize, Minimum, NelderMeadOptions};

use crate::criteria::InequalityId;
use crate::error::{Error, Result};
use crate::qstate::{bit_of, CMatrix, DensityMatrix, PureState};

pub type Unitary2 = [[C64; 2]; 2];

/// Three angles `(theta, phi1, phi2)` per qubit:
/// `U = [[cos t e^{i p1}, sin t e^{i p2}], [-sin t e^{-i p2}, cos t e^{-i p1}]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitaryParams {
    angles: Vec<[f64; 3]>,
}

impl LocalUnitaryParams {
    pub fn identity(n: usize) -> Self {
        Self { angles: vec![[0.0; 3]; n] }
    }

    pub fn new(angles: Vec<[f64; 3]>) -> Self {
        Self { angles }
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(3) {
            return Err(Error::DimensionMismatch { expected: flat.len().next_multiple_of(3), found: flat.len() });
        }
        Ok(Self { angles: flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect() })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.angles.iter().flatten().copied().collect()
    }

    /// Uniform angles over the canonical ranges.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            angles: (0..n)
                .map(|_| [rng.random_range(0.0..FRAC_PI_2), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)])
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }

    /// Phases reduced mod 2 pi, theta reflected into `[0, pi/2]`.
    pub fn wrapped(&self) -> Self {
        let reflect = |t: f64| {
            let t = t.rem_euclid(PI);
            if t > FRAC_PI_2 {
                PI - t
            } else {
                t
            }
        };
        Self {
            angles: self
                .angles
                .iter()
                .map(|&[t, p1, p2]| [reflect(t.abs()), p1.rem_euclid(TAU), p2.rem_euclid(TAU)])
                .collect(),
        }
    }

    pub fn unitary(&self, q: usize) -> Unitary2 {
        let [t, p1, p2] = self.angles[q];
        let (s, c) = t.sin_cos();
        let e1 = C64::from_polar(1.0, p1);
        let e2 = C64::from_polar(1.0, p2);
        [[c * e1, s * e2], [-s * e2.conj(), c * e1.conj()]]
    }
}

/// `M <- U_q M` where `U_q` acts on qubit `q`.
fn left_apply(m: &mut CMatrix, n: usize, q: usize, u: &Unitary2) {
    let bit = bit_of(n, q);
    let dim = m.dim();
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for c in 0..dim {
            let a = m[(r0, c)];
            let b = m[(r1, c)];
            m[(r0, c)] = u[0][0] * a + u[0][1] * b;
            m[(r1, c)] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// `M <- M U_q^dagger`.
fn right_apply_adjoint(m: &mut CMatrix, n: usize, q: usize, u: &Unitary2) {
    let bit = bit_of(n, q);
    let dim = m.dim();
    for r in 0..dim {
        for c0 in (0..dim).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let a = m[(r, c0)];
            let b = m[(r, c1)];
            m[(r, c0)] = a * u[0][0].conj() + b * u[0][1].conj();
            m[(r, c1)] = a * u[1][0].conj() + b * u[1][1].conj();
        }
    }
}

/// `U rho U^dagger` with `U = U_1 (x) ... (x) U_n`.
pub fn apply_local_unitary(rho: &DensityMatrix, params: &LocalUnitaryParams) -> Result<DensityMatrix> {
    let n = rho.n();
    if params.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: params.n() });
    }
    let mut m = rho.matrix().clone();
    for q in 0..n {
        let u = params.unitary(q);
        left_apply(&mut m, n, q, &u);
        right_apply_adjoint(&mut m, n, q, &u);
    }
    Ok(DensityMatrix::from_trusted(n, m))
}

pub fn apply_local_unitary_state(psi: &PureState, params: &LocalUnitaryParams) -> Result<PureState> {
    let n = psi.n();
    if params.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: params.n() });
    }
    let mut a = psi.amplitudes().to_vec();
    for q in 0..n {
        let u = params.unitary(q);
        let bit = bit_of(n, q);
        for i0 in (0..a.len()).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            let (x, y) = (a[i0], a[i1]);
            a[i0] = u[0][0] * x + u[0][1] * y;
            a[i1] = u[1][0] * x + u[1][1] * y;
        }
    }
    PureState::normalized(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub max_evals: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { restarts: 20, max_evals: 2000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_lhs: f64,
    pub best_params: LocalUnitaryParams,
    pub restarts_used: usize,
    pub evaluations_used: usize,
    pub converged: bool,
}

/// Random generator for restart `index`; independent of scheduling.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Nelder-Mead over the `3n` angles from `budget.restarts` starting points:
/// the identity first, then seeded random draws.
pub fn maximize_violation(
    rho: &DensityMatrix,
    inequality: InequalityId,
    budget: Budget,
    seed: u64,
) -> Result<OptimizationResult> {
    if budget.restarts == 0 || budget.max_evals == 0 {
        return Err(Error::OutOfRange("optimization budget must be positive".into()));
    }
    let n = rho.n();
    let identity_lhs = inequality.lhs(rho)?;

    let objective = |x: &[f64]| -> f64 {
        let p = LocalUnitaryParams::from_flat(x).expect("3n parameters").wrapped();
        match apply_local_unitary(rho, &p).and_then(|r| inequality.lhs(&r)) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    let opts = NelderMeadOptions { max_evals: budget.max_evals, ..Default::default() };

    let runs: Vec<Minimum> = (0..budget.restarts)
        .into_par_iter()
        .map(|k| {
            let start = if k == 0 {
                LocalUnitaryParams::identity(n)
            } else {
                LocalUnitaryParams::random(n, &mut restart_rng(seed, k))
            };
            minimize(objective, &start.to_flat(), &opts)
        })
        .collect();

    let evaluations_used = runs.iter().map(|m| m.evals).sum();
    let mut best = OptimizationResult {
        best_lhs: identity_lhs,
        best_params: LocalUnitaryParams::identity(n),
        restarts_used: budget.restarts,
        evaluations_used,
        converged: false,
    };
    for run in &runs {
        let lhs = -run.value;
        if lhs > best.best_lhs {
            best.best_lhs = lhs;
            best.best_params = LocalUnitaryParams::from_flat(&run.x)?.wrapped();
            best.converged = run.converged;
        } else if lhs == best.best_lhs && !best.converged {
            best.converged = run.converged;
        }
    }
    Ok(best)
}
