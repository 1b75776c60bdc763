use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid of {samples} samples exceeds the memory budget of {budget}")]
    GridTooLarge { samples: usize, budget: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid cube range: {0}")]
    InvalidCubeRange(String),
    #[error("infeasible support: {0}")]
    InfeasibleSupport(String),
    #[error("ill-conditioned moment system (condition number {condition:.3e}, limit {limit:.1e})")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("resolution too coarse: {0}")]
    Resolution(String),
    #[error("padding insufficient: workspace {workspace} < {required} samples per axis")]
    PaddingInsufficient { workspace: usize, required: usize },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid space spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("{path}: {message} (byte offset {offset})")]
    Malformed {
        path: PathBuf,
        offset: u64,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
