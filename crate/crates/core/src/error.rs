use thiserror::Error;

/// Errors raised by the Cayley-Klein group routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CkError {
    /// An argument lies outside the domain of the operation (bad index,
    /// wrong vector length, non-finite scalar).
    #[error("domain error: {0}")]
    Domain(String),

    /// The input violates a documented precondition, e.g. a matrix that is
    /// not an isometry of the signature's metric.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Canonical coordinates could not be recovered at the given block.
    #[error("degenerate factorization at stage {stage}: {reason}")]
    Degeneracy { stage: usize, reason: String },

    /// Invalid configuration (sampling truncation, representation family, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The request is outside the implemented theory (zero-radius orbits).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A signature string contained a token other than `1`, `i` or `d`.
    #[error("invalid signature token {token:?} (expected one of \"1\", \"i\", \"d\")")]
    Parse { token: String },
}

pub type Result<T, E = CkError> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CkError::Domain(msg.into()))
}
