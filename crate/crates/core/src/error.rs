use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is numerically singular (condition estimate {condition:.3e}): {context}")]
    Singular { context: String, condition: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("rank-deficient channel matrix; dependent users {users:?}")]
    RankDeficient { users: Vec<usize> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Config(String),

    #[error("at {frequency:.6e} Hz: {source}")]
    AtFrequency {
        frequency: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Singular { .. } | Error::Infeasible(_) | Error::RankDeficient { .. } => true,
            Error::AtFrequency { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
