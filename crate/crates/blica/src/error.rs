//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// A matrix required to be invertible is singular (or numerically so).
    #[error("singular matrix: {0}")]
    Singular(String),

    /// An exhaustive enumeration would exceed the supported size.
    #[error("{what}: dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge {
        what: &'static str,
        dim: usize,
        max: usize,
    },

    /// Two models that must imply identical q correlations do not.
    #[error("correlation matrices differ (max |Δ| = {max_abs_diff:.3e})")]
    CorrelationMismatch { max_abs_diff: f64 },

    /// Matrix or vector shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A data segment holds no observations.
    #[error("segment {0} contains no observations")]
    EmptySegment(usize),

    /// An iterative procedure exhausted its budget without a usable result.
    #[error("did not converge: {0}")]
    ConvergenceFailure(String),

    /// A data or config file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
