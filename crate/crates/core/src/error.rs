use std::io;

use thiserror::Error;

pub type Result<T, E = SikError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SikError {
    /// A fit-time hyperparameter (ψ, t) is outside its admissible range.
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    /// Dimensions or lengths of two operands disagree.
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("kernel mean requires at least one reference point")]
    EmptyReference,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown method `{name}` (available: {available})")]
    UnknownMethod { name: String, available: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    /// A file was readable but its contents do not follow the expected format.
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SikError {
    pub(crate) fn shape(context: &'static str, expected: usize, found: usize) -> Self {
        SikError::Shape {
            context,
            expected,
            found,
        }
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        SikError::Format {
            what,
            detail: detail.into(),
        }
    }

    /// True for failures caused by the filesystem or by unreadable file contents.
    pub fn is_io(&self) -> bool {
        matches!(self, SikError::Io(_) | SikError::Format { .. })
    }
}

impl From<csv::Error> for SikError {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(e) => SikError::Io(e),
                _ => unreachable!(),
            }
        } else {
            SikError::format("csv", err.to_string())
        }
    }
}
