use thiserror::Error;

/// Every fallible operation in the crate reports through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The caller broke a documented precondition (e.g. a non-Hermitian map handed to Lanczos).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative method ran out of budget. `estimate` and `error_bound` carry the best
    /// result reached so callers can decide whether it is good enough.
    #[error("no convergence: {message} (estimate {estimate:e}, error bound {error_bound:e})")]
    Convergence {
        message: String,
        estimate: f64,
        error_bound: f64,
        history: Vec<f64>,
    },

    #[error("state is critical or non-injective: |lambda_2| = {0}")]
    NonInjective(f64),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
