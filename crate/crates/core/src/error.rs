use thiserror::Error;

/// Everything that can go wrong while building or solving a problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("non-physical regime: {0}")]
    NonPhysical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular recurrence: vanishing denominator at series index {index}")]
    SingularRecurrence { index: usize },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("solver failure after {iterations} iterations: {message}")]
    SolverFailure { iterations: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}
