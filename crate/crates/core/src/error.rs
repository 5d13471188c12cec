use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfemError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation hit a pole, a resonance or a singular pivot.
    #[error("singularity: {0}")]
    Singular(String),

    /// An iterative kernel failed to converge.
    #[error("numerical failure: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    /// Incompatible sizes between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, CfemError>;

impl CfemError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CfemError::Domain(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        CfemError::Singular(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        CfemError::Dimension(msg.into())
    }
}
