use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("grid too narrow: boundary |W| = {boundary_max:.3e} exceeds {limit:.1e}")]
    GridTooNarrow { boundary_max: f64, limit: f64 },
    #[error("mapping check failed: {0}")]
    Mapping(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
