//! JSON state files.
//!
//! ```json
//! {"n": 3, "kind": "pure", "amplitudes": [[0.7071067811865476, 0.0], ...]}
//! {"kind": "density", "entries": [[re, im], ...]}
//! ```
//!
//! `entries` is the row-major density matrix. `"mixed"` is accepted as a
//! synonym for `"density"`; for either, the matrix may also be given under
//! `amplitudes`. `n` is optional and, when present, must match the data length.

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{projector, CMatrix, DensityMatrix, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<[f64; 2]>>,
}

/// A state file's content after validation.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Density(DensityMatrix),
}

impl LoadedState {
    pub fn n(&self) -> usize {
        match self {
            LoadedState::Pure(p) => p.n(),
            LoadedState::Density(d) => d.n(),
        }
    }

    pub fn into_density(self) -> DensityMatrix {
        match self {
            LoadedState::Pure(p) => projector(&p),
            LoadedState::Density(d) => d,
        }
    }
}

fn to_pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(values: &[[f64; 2]]) -> Vec<C64> {
    values.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

/// `log_base(len)` if `len` is an exact power of `base`.
fn exact_log(len: usize, base: usize) -> Option<usize> {
    let mut k = 0;
    let mut v = 1usize;
    while v < len {
        v = v.checked_mul(base)?;
        k += 1;
    }
    (v == len).then_some(k)
}

impl StateFile {
    pub fn from_pure(psi: &PureState) -> Self {
        Self { n: Some(psi.n()), kind: StateKind::Pure, amplitudes: Some(to_pairs(psi.amplitudes())), entries: None }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            n: Some(rho.n()),
            kind: StateKind::Density,
            amplitudes: None,
            entries: Some(to_pairs(rho.matrix().as_slice())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files always serialize")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    fn check_n(&self, found: usize) -> Result<()> {
        match self.n {
            Some(n) if n != found => Err(Error::DimensionMismatch { expected: n, found }),
            _ => Ok(()),
        }
    }

    /// Length checks followed by the full invariant checks of the target type.
    pub fn load(&self) -> Result<LoadedState> {
        match self.kind {
            StateKind::Pure => {
                if self.entries.is_some() {
                    return Err(Error::Parse("a pure state takes \"amplitudes\", not \"entries\"".into()));
                }
                let amps = self.amplitudes.as_deref().ok_or_else(|| Error::Parse("missing \"amplitudes\"".into()))?;
                let k = exact_log(amps.len(), 2).ok_or(Error::NotPowerOfTwo(amps.len()))?;
                self.check_n(k)?;
                Ok(LoadedState::Pure(PureState::new(from_pairs(amps))?))
            }
            StateKind::Mixed | StateKind::Density => {
                let entries = match (&self.entries, &self.amplitudes) {
                    (Some(e), None) | (None, Some(e)) => e,
                    (Some(_), Some(_)) => {
                        return Err(Error::Parse("give either \"entries\" or \"amplitudes\", not both".into()))
                    }
                    (None, None) => return Err(Error::Parse("missing \"entries\"".into())),
                };
                let k = exact_log(entries.len(), 4)
                    .ok_or_else(|| Error::Parse(format!("{} entries is not 4^n for any n", entries.len())))?;
                self.check_n(k)?;
                let m = CMatrix::from_row_major(from_pairs(entries))?;
                Ok(LoadedState::Density(DensityMatrix::from_matrix(m)?))
            }
        }
    }
}

pub fn load_state(path: &Path) -> Result<LoadedState> {
    StateFile::read(path)?.load()
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    StateFile::from_density(rho).write(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{ghz, w_state};

    #[test]
    fn pure_round_trip() {
        let psi = w_state(3).unwrap();
        let text = StateFile::from_pure(&psi).to_json();
        match StateFile::from_json(&text).unwrap().load().unwrap() {
            LoadedState::Pure(p) => assert_eq!(p, psi),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn density_round_trip_without_n() {
        let rho = projector(&ghz(3).unwrap());
        let mut file = StateFile::from_density(&rho);
        file.n = None;
        let back = StateFile::from_json(&file.to_json()).unwrap().load().unwrap().into_density();
        assert_eq!(back, rho);
    }

    #[test]
    fn mixed_accepts_amplitudes_key() {
        let text = r#"{"kind": "mixed", "amplitudes": [[0.5,0],[0,0],[0,0],[0.5,0]]}"#;
        let rho = StateFile::from_json(text).unwrap().load().unwrap().into_density();
        assert_eq!(rho.n(), 1);
    }

    #[test]
    fn length_errors() {
        let bad = r#"{"n": 2, "kind": "pure", "amplitudes": [[1,0],[0,0]]}"#;
        assert!(matches!(StateFile::from_json(bad).unwrap().load(), Err(Error::DimensionMismatch { .. })));
        let bad = r#"{"n": 1, "kind": "density", "entries": [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#;
        assert!(matches!(StateFile::from_json(bad).unwrap().load(), Err(Error::DimensionMismatch { .. })));
        let bad = r#"{"kind": "pure", "amplitudes": [[1,0],[0,0],[0,0]]}"#;
        assert_eq!(StateFile::from_json(bad).unwrap().load(), Err(Error::NotPowerOfTwo(3)));
        let bad = r#"{"kind": "density", "entries": [[1,0],[0,0]]}"#;
        assert!(matches!(StateFile::from_json(bad).unwrap().load(), Err(Error::Parse(_))));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(StateFile::from_json("{"), Err(Error::Parse(_))));
        assert!(matches!(StateFile::from_json(r#"{"kind": "quantum"}"#), Err(Error::Parse(_))));
        assert!(matches!(StateFile::from_json(r#"{"kind": "pure", "extra": 1}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn invariant_violations_surface() {
        let text = r#"{"kind": "density", "entries": [[0.6,0],[0,0],[0,0],[0.6,0]]}"#;
        let err = StateFile::from_json(text).unwrap().load().unwrap_err();
        assert!(matches!(err, Error::TraceNotOne(_)));
        assert!(err.is_invariant_violation());

        let text = r#"{"kind": "pure", "amplitudes": [[1,0],[1,0]]}"#;
        assert!(StateFile::from_json(text).unwrap().load().unwrap_err().is_invariant_violation());
    }
}
