//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by scene generation, exact predicates, the kinetic engine and the analyses.
#[derive(Debug, Error)]
pub enum KdtError {
    /// A scene violates the general-position assumption.
    #[error("degenerate scene: {0}")]
    Degenerate(String),

    /// A certificate polynomial has a root of even multiplicity inside the horizon.
    #[error("tangential root in certificate {0}")]
    Tangency(String),

    /// Two distinct events could not be separated at the configured precision.
    #[error("ordering error: {0}")]
    Ordering(String),

    /// The caller broke a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A structural invariant failed at runtime.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Malformed input data or configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, KdtError>;
