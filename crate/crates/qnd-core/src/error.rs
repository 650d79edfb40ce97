use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum QndError {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A domain object failed its construction invariants.
    #[error("invalid {kind}: {reason}")]
    Invalid { kind: &'static str, reason: String },

    /// A numeric argument is outside its admissible range.
    #[error("{0}")]
    Domain(String),

    /// A file or JSON document could not be interpreted.
    #[error("parse error: {0}")]
    Parse(String),
}

impl QndError {
    pub(crate) fn invalid(kind: &'static str, reason: impl Into<String>) -> Self {
        QndError::Invalid {
            kind,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QndError>;
