use crate::linalg::LinalgError;
use crate::model::ValidationReport;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    /// A design failed structural validation; the report lists each violation.
    #[error("invalid design:\n{0}")]
    InvalidSpec(ValidationReport),

    /// A request that is out of range, inconsistent, or otherwise unusable.
    #[error("{0}")]
    Usage(String),

    /// A `.blocks` file or edit script could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
