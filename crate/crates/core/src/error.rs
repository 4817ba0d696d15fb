use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit count {n} outside the supported range {min}..={max}")]
    QubitCount { n: usize, min: usize, max: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("invalid qubit permutation: {0}")]
    InvalidPermutation(String),

    #[error("mixture weights must be positive and sum to 1 (sum = {0})")]
    InvalidWeights(f64),

    #[error("coefficient {index} has magnitude {magnitude:e}; nonzero coefficients are required")]
    ZeroCoefficient { index: usize, magnitude: f64 },

    #[error("parameters outside the allowed region: {0}")]
    OutOfRange(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("diagonal element {index} is negative ({value:e})")]
    NegativeDiagonal { index: usize, value: f64 },
}

impl Error {
    /// True for errors raised because a numeric object failed a state invariant
    /// (normalization, Hermiticity, trace, positivity), as opposed to malformed
    /// requests.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::NonFinite
                | Error::NotNormalized(_)
                | Error::NotHermitian(_)
                | Error::TraceNotOne(_)
                | Error::NotPositive(_)
                | Error::NegativeDiagonal { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
