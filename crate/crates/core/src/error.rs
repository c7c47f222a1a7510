use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("invalid hypergeometric parameters: {0}")]
    HypergeometricParams(String),

    #[error("hypergeometric series diverges at z = 1 (c - a - b = {0} <= 0)")]
    DivergentAtOne(f64),

    #[error("failed to converge: {0}")]
    NonConvergence(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("angular grid too coarse: {0}")]
    Aliasing(String),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
