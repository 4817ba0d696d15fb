//! Class-discrimination inequalities and the biseparability (GME) inequality.
//!
//! Every evaluator reads a fixed set of computational-basis matrix elements.
//! Sums written over `i != j` run over ordered pairs, so each unordered pair
//! contributes twice; `d_ij = d_ji`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{bit_of, DensityMatrix};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Diagonal entries below `-NEGATIVE_DIAG_TOL` make the GME evaluator fail.
pub const NEGATIVE_DIAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InequalityId {
    I2,
    In,
    InMinus1,
    #[serde(rename = "GME")]
    Gme,
}

impl InequalityId {
    pub const ALL: [InequalityId; 4] = [InequalityId::In, InequalityId::I2, InequalityId::InMinus1, InequalityId::Gme];

    pub fn is_linear(self) -> bool {
        !matches!(self, InequalityId::Gme)
    }

    /// What a violation rules out.
    pub fn violation_verdict(self) -> &'static str {
        match self {
            InequalityId::I2 => "not in double class",
            InequalityId::In => "not in n-tuple class",
            InequalityId::InMinus1 => "not in (n-1)-tuple class",
            InequalityId::Gme => "genuinely multipartite entangled",
        }
    }

    pub fn lhs(self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            InequalityId::I2 => eval_i2(rho),
            InequalityId::In => eval_in(rho),
            InequalityId::InMinus1 => eval_in_minus1(rho),
            InequalityId::Gme => eval_gme(rho),
        }
    }

    pub fn report(self, rho: &DensityMatrix, tolerance: f64) -> Result<InequalityReport> {
        Ok(InequalityReport::new(self, rho.n(), self.lhs(rho)?, tolerance))
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityId::I2 => "I2",
            InequalityId::In => "In",
            InequalityId::InMinus1 => "InMinus1",
            InequalityId::Gme => "GME",
        })
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i2" => Ok(InequalityId::I2),
            "in" => Ok(InequalityId::In),
            "inminus1" | "inm1" | "in-1" => Ok(InequalityId::InMinus1),
            "gme" => Ok(InequalityId::Gme),
            _ => Err(Error::Parse(format!("unknown inequality {s:?}"))),
        }
    }
}

/// Computational labels used by the inequalities.
#[derive(Debug, Clone, Copy)]
pub struct BasisLabels {
    n: usize,
}

impl BasisLabels {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `|0...0>`
    pub fn zeros(&self) -> usize {
        0
    }

    /// `|1...1>`
    pub fn ones(&self) -> usize {
        (1 << self.n) - 1
    }

    /// Single excitation on qubit `i`.
    pub fn w(&self, i: usize) -> usize {
        bit_of(self.n, i)
    }

    /// Excitations on qubits `i` and `j` (`i != j`).
    pub fn d(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        bit_of(self.n, i) | bit_of(self.n, j)
    }

    /// Bitwise complement.
    pub fn bar(&self, idx: usize) -> usize {
        idx ^ self.ones()
    }

    pub fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
    }
}

/// Weights of the subtracted diagonal terms.
///
/// For I(2) and I(n-1): `alpha` multiplies the single-excitation populations,
/// `beta` the all-zero (and all-one) populations, `gamma` the two-excitation
/// populations. For I(n) only `alpha` is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl InequalityCoefficients {
    /// `(n-2, n(n-1)/2, 1)`: valid for biseparable states and double states.
    pub fn double_standard(n: usize) -> Self {
        let nf = n as f64;
        Self { alpha: nf - 2.0, beta: nf * (nf - 1.0) / 2.0, gamma: 1.0 }
    }

    /// `((n-2)/2, n(n-2)/4, (n-2)/(4(n-1)))`: the smaller triple that suffices
    /// for double states at even `n`. Biseparable states can violate it, so a
    /// violation does not certify anything beyond "not a double state".
    pub fn double_tight(n: usize) -> Self {
        let nf = n as f64;
        Self { alpha: (nf - 2.0) / 2.0, beta: nf * (nf - 2.0) / 4.0, gamma: (nf - 2.0) / (4.0 * (nf - 1.0)) }
    }

    pub fn ntuple(n: usize) -> Self {
        let alpha = match n {
            3 => 1.5,
            4 => 1.0,
            _ => 0.5,
        };
        Self { alpha, beta: 0.0, gamma: 0.0 }
    }

    pub fn dicke(n: usize) -> Self {
        let nf = n as f64;
        Self { alpha: nf - 2.0, beta: nf * (nf - 1.0) / 2.0, gamma: nf - 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum I2Mode {
    #[default]
    Standard,
    Tight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: InequalityId,
    pub n: usize,
    pub lhs: f64,
    pub tolerance: f64,
    pub violated: bool,
    pub verdict: String,
}

impl InequalityReport {
    pub fn new(inequality: InequalityId, n: usize, lhs: f64, tolerance: f64) -> Self {
        let violated = lhs > tolerance;
        let verdict = if violated { inequality.violation_verdict() } else { "inconclusive" };
        Self { inequality, n, lhs, tolerance, violated, verdict: verdict.to_string() }
    }
}

fn labels(rho: &DensityMatrix) -> Result<BasisLabels> {
    let n = rho.n();
    if n < 3 {
        return Err(Error::QubitCount { n, min: 3, max: crate::qstate::max_qubits() });
    }
    Ok(BasisLabels::new(n))
}

/// `Re<0..0|rho|1..1> - alpha (1 - <0..0|rho|0..0> - <1..1|rho|1..1>)`
pub fn eval_in(rho: &DensityMatrix) -> Result<f64> {
    let b = labels(rho)?;
    let alpha = InequalityCoefficients::ntuple(b.n()).alpha;
    let corner = rho.entry(b.zeros(), b.ones()).re;
    Ok(corner - alpha * (1.0 - rho.diag(b.zeros()) - rho.diag(b.ones())))
}

pub fn eval_i2(rho: &DensityMatrix) -> Result<f64> {
    eval_i2_mode(rho, I2Mode::Standard)
}

pub fn eval_i2_mode(rho: &DensityMatrix, mode: I2Mode) -> Result<f64> {
    let n = rho.n();
    let coeffs = match mode {
        I2Mode::Standard => InequalityCoefficients::double_standard(n),
        I2Mode::Tight => InequalityCoefficients::double_tight(n),
    };
    eval_i2_with(rho, coeffs)
}

pub fn eval_i2_with(rho: &DensityMatrix, k: InequalityCoefficients) -> Result<f64> {
    let b = labels(rho)?;
    let sign = if b.n() % 2 == 1 { 1.0 } else { -1.0 }; // (-1)^(n+1)
    let mut off = 0.0;
    let mut dd = 0.0;
    for (i, j) in b.ordered_pairs() {
        off += rho.entry(b.w(i), b.w(j)).re + sign * rho.entry(b.bar(b.w(i)), b.bar(b.w(j))).re;
        dd += rho.diag(b.d(i, j)) + rho.diag(b.bar(b.d(i, j)));
    }
    let ww: f64 = (0..b.n()).map(|i| rho.diag(b.w(i)) + rho.diag(b.bar(b.w(i)))).sum();
    let corners = rho.diag(b.zeros()) + rho.diag(b.ones());
    Ok(off - k.alpha * ww - k.gamma * dd - k.beta * corners)
}

pub fn eval_in_minus1(rho: &DensityMatrix) -> Result<f64> {
    let b = labels(rho)?;
    let k = InequalityCoefficients::dicke(b.n());
    let mut off = 0.0;
    let mut dd = 0.0;
    for (i, j) in b.ordered_pairs() {
        off += rho.entry(b.w(i), b.w(j)).re;
        dd += rho.diag(b.d(i, j));
    }
    let ww: f64 = (0..b.n()).map(|i| rho.diag(b.w(i))).sum();
    Ok(off - k.alpha * ww - k.gamma * dd - k.beta * rho.diag(b.zeros()))
}

fn checked_diag(rho: &DensityMatrix, idx: usize) -> Result<f64> {
    let v = rho.diag(idx);
    if v < -NEGATIVE_DIAG_TOL {
        return Err(Error::NegativeDiagonal { index: idx, value: v });
    }
    Ok(v.max(0.0))
}

/// `sum Re<w_i|rho|w_j> - sum sqrt(<0..0|rho|0..0><d_ij|rho|d_ij>) - (n-2) sum <w_i|rho|w_i>`
pub fn eval_gme(rho: &DensityMatrix) -> Result<f64> {
    let b = labels(rho)?;
    let zero = checked_diag(rho, b.zeros())?;
    let mut off = 0.0;
    let mut roots = 0.0;
    for (i, j) in b.ordered_pairs() {
        off += rho.entry(b.w(i), b.w(j)).re;
        roots += (zero * checked_diag(rho, b.d(i, j))?).sqrt();
    }
    let mut ww = 0.0;
    for i in 0..b.n() {
        ww += checked_diag(rho, b.w(i))?;
    }
    Ok(off - roots - (b.n() as f64 - 2.0) * ww)
}

pub fn evaluate_all(rho: &DensityMatrix, tolerance: f64) -> Result<Vec<InequalityReport>> {
    InequalityId::ALL.iter().map(|id| id.report(rho, tolerance)).collect()
}
