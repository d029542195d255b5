use thiserror::Error;

/// Errors raised by the solvers and builders in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EcmError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("insufficient mesh resolution: {0}")]
    Resolution(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("singular extraction of the equivalent parameter (denominator {denominator:e})")]
    SingularExtraction { denominator: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite at row {0}")]
    NotPositiveDefinite(usize),

    #[error("no bracket found for the stress-strain relation: {0}")]
    ModelRange(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl EcmError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        EcmError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for EcmError {
    fn from(e: std::io::Error) -> Self {
        EcmError::Io(e.to_string())
    }
}

impl From<csv::Error> for EcmError {
    fn from(e: csv::Error) -> Self {
        EcmError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for EcmError {
    fn from(e: serde_json::Error) -> Self {
        EcmError::Io(e.to_string())
    }
}

pub type Result<T, E = EcmError> = std::result::Result<T, E>;
