use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the selection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}:{column}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("grid not strictly increasing at position {position} ({previous} >= {current})")]
    GridNotIncreasing {
        position: usize,
        previous: f64,
        current: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("grid mismatch: predictor expects time {expected} at index {index}, data has {actual}")]
    GridMismatch { index: usize, expected: f64, actual: f64 },

    #[error("true point {0} is not representable on the grid")]
    PointNotOnGrid(f64),

    #[error("matrix not positive definite (leading minor {minor})")]
    NotPositiveDefinite { minor: usize },

    #[error("candidate {index} is redundant (denominator {denominator:e} <= tolerance)")]
    Redundant { index: usize, denominator: f64 },

    #[error("point set is empty")]
    EmptySet,

    #[error("exhaustive search needs {needed} subsets, cap is {cap}")]
    EnumerationCap { needed: u128, cap: u128 },

    #[error("{failed} of {reps} replications failed")]
    TooManyFailures { failed: usize, reps: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::NotPositiveDefinite { .. }
            | Error::Redundant { .. }
            | Error::TooManyFailures { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
