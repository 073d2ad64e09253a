use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Failed verification is never an error: it comes back as a report. These
/// variants cover malformed input and incompatible operands.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("radicand mismatch: {0} vs {1}")]
    RadicandMismatch(u64, u64),

    #[error("invalid radicand {0}: must be 1 or a positive non-square integer")]
    InvalidRadicand(u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("qubit count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("unsupported qubit count {0} (expected 1..=24)")]
    QubitCount(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid exchange E_{0}{1}: need 1 <= j < k")]
    InvalidExchange(usize, usize),

    #[error("weight {weight} out of range for {n} qubits")]
    WeightOutOfRange { weight: usize, n: usize },

    #[error("invalid error set: {0}")]
    ErrorSet(String),

    #[error("invalid code: {0}")]
    Code(String),

    #[error("unknown code '{0}'")]
    UnknownCode(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("matrix is not consistent with the degenerate conditions")]
    NotDegenerate,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
