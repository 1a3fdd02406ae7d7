//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the analysis and ingestion layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input carries no usable rows or values at all.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// The input exists but is too short or too sparse for the operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A selection (application id, metric name, clock window) matched nothing.
    #[error("empty selection: {0}")]
    EmptySelection(String),

    /// A tabular source is missing a required column or field.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value could not be decoded in the expected format.
    #[error("format error: {0}")]
    Format(String),

    /// The input is structurally valid but numerically degenerate
    /// (rank-deficient regression, zero-variance window, and similar).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An iterative estimator ran out of its iteration budget.
    /// `detail` describes the last iterate so callers can inspect it.
    #[error("estimator did not converge: {detail}")]
    Convergence { detail: String },

    /// Underlying I/O failure while reading a source or writing an output.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Convenience constructor used by validation guards.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
