//! Class-discrimination inequalities for multi-qubit states: evaluation,
//! Pauli-basis rewriting, local-unitary optimization and parameter scans.

pub mod commands;
pub mod criteria;
pub mod error;
pub mod families;
pub mod optimizer;
pub mod pauli;
pub mod qstate;
pub mod scan;
pub mod statefile;

pub use criteria::{InequalityId, InequalityReport};
pub use error::{Error, Result};
pub use qstate::{DensityMatrix, PureState};
