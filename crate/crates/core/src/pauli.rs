//! Rewriting the inequalities as real combinations of local Pauli
//! expectation values, and counting the measurement settings they need.
//!
//! A string such as `xy1z` stands for `<sx (x) sy (x) 1 (x) sz>`. Coefficients
//! are exact: each single-qubit factor `|k><b|` contributes `(1 +/- z)/2` or
//! `(x +/- iy)/2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::criteria::{BasisLabels, InequalityCoefficients, InequalityId};
use crate::error::{Error, Result};
use crate::qstate::{bit_of, DensityMatrix};

/// Terms with smaller magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => '1',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '1' => Some(Pauli::I),
            'x' | 'X' => Some(Pauli::X),
            'y' | 'Y' => Some(Pauli::Y),
            'z' | 'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Empty("Pauli string"));
        }
        Ok(Self(letters))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// True when `other` measures every non-identity letter of `self` on the
    /// same axis, so `self` is a marginal of the setting `other`.
    pub fn is_marginal_of(&self, other: &Self) -> bool {
        self.n() == other.n() && self.0.iter().zip(&other.0).all(|(&a, &b)| a == Pauli::I || a == b)
    }

    /// `Tr(rho sigma)` using the fact that a Pauli string maps each basis
    /// vector to a phase times another basis vector.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        let n = self.n();
        if rho.n() != n {
            return Err(Error::DimensionMismatch { expected: rho.n(), found: n });
        }
        let mut flip = 0usize;
        for (q, &p) in self.0.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= bit_of(n, q);
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..rho.dim() {
            // sigma |j> = phase |j ^ flip>
            let mut phase = C64::new(1.0, 0.0);
            for (q, &p) in self.0.iter().enumerate() {
                let one = j & bit_of(n, q) != 0;
                phase *= match (p, one) {
                    (Pauli::Y, false) => C64::new(0.0, 1.0),
                    (Pauli::Y, true) => C64::new(0.0, -1.0),
                    (Pauli::Z, true) => C64::new(-1.0, 0.0),
                    _ => C64::new(1.0, 0.0),
                };
            }
            acc += rho.entry(j, j ^ flip) * phase;
        }
        Ok(acc.re)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

/// Real linear combination of Pauli strings on `n` qubits. Constants live on
/// the identity string.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliExpansion {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliExpansion {
    pub fn new(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.terms.get(s).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, s: PauliString, c: f64) -> Result<()> {
        if s.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: s.n() });
        }
        let entry = self.terms.entry(s).or_insert(0.0);
        *entry += c;
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &Self, w: f64) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        for (s, &c) in &other.terms {
            *self.terms.entry(s.clone()).or_insert(0.0) += w * c;
        }
        Ok(())
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|(s, &c)| (s.clone(), c * w)).collect() }
    }

    pub fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() >= PRUNE_TOL);
        self
    }

    /// `sum_s c_s Tr(rho sigma_s)`
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rho.n() });
        }
        let mut total = 0.0;
        for (s, &c) in &self.terms {
            total += c * if s.is_identity() { rho.trace() } else { s.expectation(rho)? };
        }
        Ok(total)
    }

    /// One `<coeff> <string>` line per term.
    pub fn to_text(&self) -> String {
        self.terms.iter().map(|(s, c)| format!("{c} {s}\n")).collect()
    }

    /// Largest coefficient difference over the union of both supports.
    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&PauliString> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().map(|s| (self.coefficient(s) - other.coefficient(s)).abs()).fold(0.0, f64::max)
    }
}

impl FromStr for PauliExpansion {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut out: Option<PauliExpansion> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(c), Some(s), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected `<coeff> <string>`", lineno + 1)));
            };
            let c: f64 = c.parse().map_err(|_| Error::Parse(format!("line {}: bad coefficient {c:?}", lineno + 1)))?;
            let s: PauliString = s.parse()?;
            let exp = out.get_or_insert_with(|| PauliExpansion::new(s.n()));
            exp.add_term(s, c)?;
        }
        out.map(PauliExpansion::pruned).ok_or(Error::Empty("Pauli expansion text"))
    }
}

impl fmt::Display for PauliExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Complex expansion of `<bra|rho|ket> = Tr(rho |ket><bra|)`.
fn expand_dyad(n: usize, bra: usize, ket: usize) -> BTreeMap<PauliString, C64> {
    let half = C64::new(0.5, 0.0);
    let ihalf = C64::new(0.0, 0.5);
    let mut acc: Vec<(Vec<Pauli>, C64)> = vec![(Vec::with_capacity(n), C64::new(1.0, 0.0))];
    for q in 0..n {
        let b = bra & bit_of(n, q) != 0;
        let k = ket & bit_of(n, q) != 0;
        // |k><b| over {1, x, y, z}
        let factor: [(Pauli, C64); 2] = match (k, b) {
            (false, false) => [(Pauli::I, half), (Pauli::Z, half)],
            (true, true) => [(Pauli::I, half), (Pauli::Z, -half)],
            (false, true) => [(Pauli::X, half), (Pauli::Y, ihalf)],
            (true, false) => [(Pauli::X, half), (Pauli::Y, -ihalf)],
        };
        acc = acc
            .into_iter()
            .flat_map(|(letters, c)| {
                factor.iter().map(move |&(p, f)| {
                    let mut l = letters.clone();
                    l.push(p);
                    (l, c * f)
                })
            })
            .collect();
    }
    acc.into_iter().map(|(l, c)| (PauliString(l), c)).collect()
}

fn real_part(n: usize, dyad: BTreeMap<PauliString, C64>, require_real: bool) -> PauliExpansion {
    let mut out = PauliExpansion::new(n);
    for (s, c) in dyad {
        if require_real {
            assert!(c.im.abs() < PRUNE_TOL, "diagonal element produced imaginary coefficient {c}");
        }
        out.terms.insert(s, c.re);
    }
    out.pruned()
}

fn parse_pattern(n: usize, bits: &str) -> Result<usize> {
    if bits.chars().count() != n {
        return Err(Error::DimensionMismatch { expected: n, found: bits.chars().count() });
    }
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc * 2),
        '1' => Ok(acc * 2 + 1),
        _ => Err(Error::Parse(format!("invalid bit {ch:?} in {bits:?}"))),
    })
}

/// `Re<bra|rho|ket>` as a Pauli expansion (for `bra == ket` this is the
/// population itself).
pub fn expand_matrix_element(n: usize, bra: &str, ket: &str) -> Result<PauliExpansion> {
    crate::qstate::check_qubits(n)?;
    let b = parse_pattern(n, bra)?;
    let k = parse_pattern(n, ket)?;
    Ok(expand_element_index(n, b, k))
}

pub(crate) fn expand_element_index(n: usize, bra: usize, ket: usize) -> PauliExpansion {
    real_part(n, expand_dyad(n, bra, ket), bra == ket)
}

/// Accumulates weighted matrix elements without re-pruning on every step.
struct Builder {
    n: usize,
    out: PauliExpansion,
}

impl Builder {
    fn new(n: usize) -> Self {
        Self { n, out: PauliExpansion::new(n) }
    }

    fn element(&mut self, w: f64, bra: usize, ket: usize) {
        let e = real_part(self.n, expand_dyad(self.n, bra, ket), bra == ket);
        self.out.add_scaled(&e, w).expect("same qubit count");
    }

    fn constant(&mut self, c: f64) {
        self.out.add_term(PauliString::identity(self.n), c).expect("same qubit count");
    }

    fn finish(self) -> PauliExpansion {
        self.out.pruned()
    }
}

/// Full left-hand side of a linear inequality as one Pauli expansion.
pub fn expand_inequality(id: InequalityId, n: usize) -> Result<PauliExpansion> {
    if n < 3 {
        return Err(Error::QubitCount { n, min: 3, max: crate::qstate::max_qubits() });
    }
    crate::qstate::check_qubits(n)?;
    let b = BasisLabels::new(n);
    let mut e = Builder::new(n);
    match id {
        InequalityId::Gme => {
            return Err(Error::Unsupported("the GME inequality is not linear in rho".into()));
        }
        InequalityId::In => {
            let alpha = InequalityCoefficients::ntuple(n).alpha;
            e.element(1.0, b.zeros(), b.ones());
            e.constant(-alpha);
            e.element(alpha, b.zeros(), b.zeros());
            e.element(alpha, b.ones(), b.ones());
        }
        InequalityId::I2 => {
            let k = InequalityCoefficients::double_standard(n);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            for (i, j) in b.ordered_pairs() {
                e.element(1.0, b.w(i), b.w(j));
                e.element(sign, b.bar(b.w(i)), b.bar(b.w(j)));
                e.element(-k.gamma, b.d(i, j), b.d(i, j));
                e.element(-k.gamma, b.bar(b.d(i, j)), b.bar(b.d(i, j)));
            }
            for i in 0..n {
                e.element(-k.alpha, b.w(i), b.w(i));
                e.element(-k.alpha, b.bar(b.w(i)), b.bar(b.w(i)));
            }
            e.element(-k.beta, b.zeros(), b.zeros());
            e.element(-k.beta, b.ones(), b.ones());
        }
        InequalityId::InMinus1 => {
            let k = InequalityCoefficients::dicke(n);
            for (i, j) in b.ordered_pairs() {
                e.element(1.0, b.w(i), b.w(j));
                e.element(-k.gamma, b.d(i, j), b.d(i, j));
            }
            for i in 0..n {
                e.element(-k.alpha, b.w(i), b.w(i));
            }
            e.element(-k.beta, b.zeros(), b.zeros());
        }
    }
    Ok(e.finish())
}

pub fn evaluate_expansion(expansion: &PauliExpansion, rho: &DensityMatrix) -> Result<f64> {
    expansion.evaluate(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingMode {
    /// Every distinct non-identity string is its own setting.
    #[default]
    Verbatim,
    /// Strings that are marginals of another listed string are dropped.
    Coarse,
}

impl FromStr for SettingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verbatim" => Ok(SettingMode::Verbatim),
            "coarse" | "coarse-grained" => Ok(SettingMode::Coarse),
            _ => Err(Error::Parse(format!("unknown setting mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingSchedule {
    pub settings: Vec<PauliString>,
    pub mode: SettingMode,
}

impl SettingSchedule {
    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }
}

pub fn count_settings(expansion: &PauliExpansion, mode: SettingMode) -> SettingSchedule {
    let strings: Vec<&PauliString> = expansion.terms.keys().filter(|s| !s.is_identity()).collect();
    let settings = match mode {
        SettingMode::Verbatim => strings.iter().map(|&s| s.clone()).collect(),
        // Marginal inclusion is a partial order; keeping its maximal elements
        // covers every string.
        SettingMode::Coarse => strings
            .iter()
            .filter(|s| !strings.iter().any(|t| t != *s && s.is_marginal_of(t)))
            .map(|&s| s.clone())
            .collect(),
    };
    SettingSchedule { settings, mode }
}

/// Number of non-identity Pauli strings on `n` qubits, `4^n - 1`.
pub fn tomography_setting_count(n: u32) -> u64 {
    4u64.pow(n) - 1
}

/// Hand-compact three-qubit forms of the inequalities, stated with the global
/// normalization factor dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactForm {
    /// `(xxx - yyx - yxy - xyy) - 3(3 - zz1 - z1z - 1zz)`: eight times I(n)
    /// at three qubits.
    NTupleThree,
    /// The compact three-qubit triple-state expression, coefficients as given:
    /// `(1xx + xx1 + x1x + 1yy + y1y + yy1) - 9/32 (3 - zz1 - z1z - 1zz)`
    /// `- 3/16 (1 - 11z - 1z1 - z11)`.
    TripleThree,
}

impl CompactForm {
    pub fn name(self) -> &'static str {
        match self {
            CompactForm::NTupleThree => "compact-in3",
            CompactForm::TripleThree => "compact-triple3",
        }
    }

    pub fn expansion(self) -> PauliExpansion {
        let text = match self {
            CompactForm::NTupleThree => "1 xxx\n-1 yyx\n-1 yxy\n-1 xyy\n-9 111\n3 zz1\n3 z1z\n3 1zz\n",
            CompactForm::TripleThree => concat!(
                "1 1xx\n1 xx1\n1 x1x\n1 1yy\n1 y1y\n1 yy1\n",
                "-0.84375 111\n0.28125 zz1\n0.28125 z1z\n0.28125 1zz\n",
                "-0.1875 111\n0.1875 11z\n0.1875 1z1\n0.1875 z11\n",
            ),
        };
        text.parse().expect("built-in compact form parses")
    }
}

impl FromStr for CompactForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compact-in3" => Ok(CompactForm::NTupleThree),
            "compact-triple3" => Ok(CompactForm::TripleThree),
            _ => Err(Error::Parse(format!("unknown compact form {s:?}"))),
        }
    }
}
