use thiserror::Error;

/// Errors raised across the identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("global state matrix is not Schur stable (spectral radius {radius:.6} >= 1)")]
    Unstable { radius: f64 },

    #[error("output matrix C of node {node} is row-rank deficient (rank {rank} < {rows})")]
    RankDeficient { node: usize, rank: usize, rows: usize },

    #[error("coupling block A[{i}][{j}] present but edge {j} -> {i} is not in the graph")]
    SparsityViolation { i: usize, j: usize },

    #[error("input series for node {node} has {got} samples, expected {expected}")]
    InputLength {
        node: usize,
        got: usize,
        expected: usize,
    },

    #[error("hidden interconnection signals present at node {node} (k = {hidden_dim})")]
    HiddenSignals { node: usize, hidden_dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
