use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// Censoring is deliberately *not* an error: a hitting time that never
/// crosses within the horizon is a value (see [`crate::path::HittingSample`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two estimates that must be decoupled were built from the same
    /// master seed.
    #[error("decoupling violation: envelope and hitting batch share master seed {0}")]
    DecouplingViolation(u64),

    /// Stationary renewal quantities require a finite, positive mean
    /// interarrival time.
    #[error("infinite-mean interarrival distribution: {0}")]
    InfiniteMean(String),

    #[error("non-monotone curve passed where a nondecreasing curve is required: {0}")]
    NonMonotone(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
