use thiserror::Error;

/// Errors raised by sets, operators, the solver and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),

    #[error("point lies outside the feasible set (residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("vertex enumeration too large: {count} vertices")]
    TooManyVertices { count: f64 },

    #[error("trace is thinned; interpolation requires consecutive iterates")]
    ThinnedTrace,

    #[error("trace needs at least {needed} rows, found {found}")]
    TraceTooShort { needed: usize, found: usize },

    #[error("operator is not strongly monotone (mu = {0})")]
    NotStronglyMonotone(f64),

    #[error("extragradient did not reach gap {tol:e} in {iterations} iterations (best gap {best:e})")]
    OracleNotConverged { iterations: usize, tol: f64, best: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant breached: {0}")]
    InvariantBreach(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
