use thiserror::Error;

/// Failure modes shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is numerically singular (pivot {pivot} below {threshold:e})")]
    Singular { pivot: usize, threshold: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("range error: {0}")]
    Range(String),
    #[error("{point} is not numerically in the resolvent set (smallest singular value {sigma_min:e})")]
    NotInResolventSet { point: String, sigma_min: f64 },
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed matrix data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
