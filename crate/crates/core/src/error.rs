use thiserror::Error;

/// Errors raised by the operators, solvers and model registry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite value at node {node} (t = {time})")]
    BlowUp { node: usize, time: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last distance {distance:e}); shrink the horizon or the data")]
    NoConvergence { iterations: usize, distance: f64 },

    #[error("cross-check failed: {what} discrepancy {discrepancy:e} exceeds {tolerance:e}")]
    CrossCheck {
        what: &'static str,
        discrepancy: f64,
        tolerance: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
