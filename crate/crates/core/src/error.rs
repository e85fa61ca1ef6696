use thiserror::Error;

/// Errors produced by the graph matching toolkit.
#[derive(Debug, Error)]
pub enum GmError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("adjacency matrix has a self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("adjacency entry ({0}, {1}) is not 0 or 1")]
    NotBinary(usize, usize),

    #[error("matrix is not doubly stochastic within tolerance {tol:e}")]
    NotDoublyStochastic { tol: f64 },

    #[error("index array is not a permutation of 0..{0}")]
    InvalidPermutation(usize),

    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("problem size {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = GmError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> GmError {
    GmError::InvalidParameter(msg.into())
}
