use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {0} exceeds the dimension 8")]
    DegreeOverflow(usize),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("expected {expected} vectors, got {found}")]
    Arity { expected: usize, found: usize },

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid multi-index {0:?}: entries must be strictly increasing in 1..=8")]
    BadIndex(Vec<u8>),

    #[error("operator is not diagonalizable over the rationals: {0}")]
    NotDiagonalizable(String),

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    Residual { what: String, residual: f64, tol: f64 },

    #[error("degenerate 4-form: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("rank-deficient Jacobian (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation failed at {location}: {message}")]
    Validation { location: String, message: String },

    #[error("unknown scenario '{name}'; valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }

    pub(crate) fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { location: location.into(), message: message.into() }
    }
}
