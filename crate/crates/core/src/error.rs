//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed something structurally wrong (empty list, index out
    /// of range, dimension mismatch).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model or state violates one of its declared invariants.
    #[error("validation failed for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// The requested computation exceeds a declared size limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A linear-algebra or null-space computation did not produce a usable
    /// answer.
    #[error("solver error: {0}")]
    Solver(String),

    /// The adaptive integrator failed (step-size underflow, step budget).
    #[error("integration error: {0}")]
    Integration(String),

    /// Time evolution hit `t_max` before the residual dropped below
    /// tolerance.
    #[error("no convergence by t = {t:.6e}; last residual {residual:.6e}")]
    Timeout { t: f64, residual: f64 },

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
