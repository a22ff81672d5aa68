//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by data ingestion, metric evaluation and the tests.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV cell or row could not be ingested. Rows and columns are 1-based.
    #[error("ingestion error at row {row}, column {col}: {reason}")]
    Ingestion {
        row: usize,
        col: usize,
        reason: String,
    },

    /// Vector or matrix sizes do not conform.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Invalid configuration (group spec, bandwidth, parameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// Too few observations for the requested statistic.
    #[error("sample-size error: need at least {needed} observations, got {got}")]
    SampleSize { needed: usize, got: usize },

    /// The data admit no variance information (all distances equal, constant
    /// sample, all-zero bandwidth pool, ...).
    #[error("degenerate-sample error: {0}")]
    Degenerate(String),

    /// The studentizing transform is undefined for these data.
    #[error("singular-statistic error: {0}")]
    Singular(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by statistically degenerate data rather than
    /// by a malformed request. The CLI maps these to a distinct exit code.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::SampleSize { .. } | Error::Degenerate(_) | Error::Singular(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
