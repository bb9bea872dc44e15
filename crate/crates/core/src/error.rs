use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot normalize: entries sum to zero")]
    AllZero,

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("empty vector")]
    EmptyVector,

    #[error("not a probability vector: {0}")]
    InvalidProbVector(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("cannot pad a vector of dimension {dim} down to {target}")]
    TargetTooSmall { dim: usize, target: usize },

    #[error("pair is not incomparable ({0})")]
    NotIncomparable(String),

    #[error("dimension {dim} is below the minimum of {min}")]
    DimTooSmall { dim: usize, min: usize },

    #[error("{rows} rows exceed the configured cap of {cap}")]
    Overflow { rows: u128, cap: usize },

    #[error("split of {total} rows at fraction {fraction} leaves one side empty")]
    EmptySplit { total: usize, fraction: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("dimension inconsistent at line {line}: expected {expected}, found {found}")]
    DimInconsistent {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("only {found} of {wanted} incomparable pairs found within {budget} draws")]
    Underfull {
        wanted: usize,
        found: usize,
        budget: usize,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("need at least {needed} distinct dimensions, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by file contents rather than the environment.
    pub fn is_malformed_data(&self) -> bool {
        matches!(
            self,
            Error::MalformedRow { .. }
                | Error::DimInconsistent { .. }
                | Error::MalformedCheckpoint(_)
                | Error::InvalidProbVector(_)
                | Error::Json(_)
        )
    }
}
