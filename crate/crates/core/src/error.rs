use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ambient mismatch: {0} vs {1} variables")]
    AmbientMismatch(usize, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("coefficient fields differ")]
    FieldMismatch,
    #[error("polynomial is not homogeneous")]
    Inhomogeneous,
    #[error("{0} is not a prime below 2^31")]
    BadPrime(u64),
    #[error("characteristic {p} is too small, need p > {need}")]
    Characteristic { p: u32, need: u32 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("budget of {0} steps exhausted")]
    BudgetExhausted(u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("the ideal is the unit ideal; its variety is empty")]
    UnitIdeal,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }
}
