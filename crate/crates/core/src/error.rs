use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes, lengths or spaces of the operands do not match.
    #[error("structural mismatch: {0}")]
    Structural(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("extremum undefined over an empty atom set")]
    UndefinedExtremum,
    /// A construction-time invariant was violated.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
    /// The module criterion refused to run on a norm that is not additive.
    #[error("refused: {0}")]
    Refused(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        what,
        reason: reason.into(),
    }
}
