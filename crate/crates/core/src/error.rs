use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` out of domain: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("operation `{op}` is not supported for the {model} correlation model")]
    UnsupportedModel { op: &'static str, model: &'static str },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("ill-conditioned covariance matrix (minimum eigenvalue estimate {min_eigenvalue:e})")]
    IllConditioned { min_eigenvalue: f64 },

    #[error("configuration is empty")]
    EmptyConfiguration,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("need at least {required} replications, got {got}")]
    InsufficientReplications { required: usize, got: usize },

    #[error("mean-measure function is not non-decreasing near s = {at}")]
    NonMonotone { at: f64 },

    #[error("infeasible experiment: {0}")]
    Infeasible(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(param(name, format!("must be positive and finite, got {value}")))
    }
}
