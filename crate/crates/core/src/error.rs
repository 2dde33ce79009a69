use std::path::PathBuf;

use crate::training::LossRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("table has no data rows")]
    EmptyTable,

    #[error("column `{column}`: cannot parse `{value}` as a number (row {row})")]
    Parse {
        column: String,
        value: String,
        row: usize,
    },

    #[error("binary column `{column}` has {count} distinct values")]
    NotBinary { column: String, count: usize },

    #[error("continuous column `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("group {0} is empty")]
    EmptyGroup(String),

    #[error("group {group} has {size} samples, at least {required} required")]
    GroupTooSmall {
        group: String,
        size: usize,
        required: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Vec<LossRecord>,
    },

    #[error("model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
