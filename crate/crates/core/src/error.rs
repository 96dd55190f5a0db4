use thiserror::Error;

/// Errors raised by the estimation library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e} exceeds tolerance {tol:e})")]
    NonSymmetric { asymmetry: f64, tol: f64 },

    #[error("requested rank {rank} exceeds the admissible maximum {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("{0} did not converge within its iteration cap")]
    NoConvergence(&'static str),

    #[error("sampling probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate observation at ({0}, {1})")]
    DuplicateEntry(usize, usize),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
