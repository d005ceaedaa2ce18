//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data does not fit its declared shape (channel lengths, pixel
    /// counts, unsupported characters, malformed files).
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// A parameter value is outside its declared domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A parameter violates a tuning constraint (parity).
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    /// Operator or typology name not in the known set.
    #[error("not found: {0}")]
    NotFound(String),

    /// A metric has no defined value for the given inputs (empty ground truth).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// The OCR engine process failed; carries its diagnostic output.
    #[error("OCR engine failure: {0}")]
    EngineFailure(String),

    /// Manifest loading collected one or more itemized record errors.
    #[error("manifest load failed with {} error(s):\n{}", .0.len(), .0.join("\n"))]
    ManifestLoad(Vec<String>),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
