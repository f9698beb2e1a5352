//! Error types shared by every module of the toolkit.

use thiserror::Error;

/// Unified error type for all fallible operations in this crate.
#[derive(Debug, Clone, Error)]
pub enum HbmoError {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point has the wrong number of coordinates for the ambient dimension.
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The requested integral is provably infinite; decided analytically from
    /// the exponents, never by observing numeric overflow.
    #[error("divergent integral: {reason}")]
    DivergentIntegral { reason: String },

    /// Adaptive quadrature exhausted its refinement budget before reaching the
    /// requested tolerance. The best estimate and its error bound are carried
    /// so callers can still report a value.
    #[error("accuracy failure: best estimate {estimate} with error bound {error_bound} ({context})")]
    AccuracyFailure {
        estimate: f64,
        error_bound: f64,
        context: String,
    },

    /// An internal invariant failed (e.g. a rejection-sampling loop exceeded
    /// its iteration cap). Indicates a bug or a pathological configuration.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, HbmoError>;

impl HbmoError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        HbmoError::InvalidArgument(msg.into())
    }
}
