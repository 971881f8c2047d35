use thiserror::Error;

/// Errors raised by the numerical kernels and the file formats.
#[derive(Debug, Error)]
pub enum SolgeoError {
    /// Input outside the domain of an operation (bad axis, shape mismatch,
    /// non-finite value, non-positive metric, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An algebraic constraint such as the spin normalization is violated.
    #[error("constraint violated: {what} (defect {defect:.3e})")]
    Constraint { what: String, defect: f64 },

    /// A numerical procedure blew up or failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SolgeoError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(SolgeoError::Domain(msg.into()))
}
