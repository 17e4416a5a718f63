use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change found while bracketing: {0}")]
    Bracket(String),

    #[error("quadrature did not reach tolerance (best estimate {best}, error estimate {error}, {evaluations} evaluations)")]
    Accuracy {
        best: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("integrand returned a non-finite value at x = {x}")]
    Integrand { x: f64 },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("parse error at `{token}`: expected {expected}")]
    Parse { token: String, expected: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("curve tracing failed: {0}")]
    Curve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
