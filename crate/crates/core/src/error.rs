use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid tolerance {0}: must be positive and finite")]
    Tolerance(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not a POVM: {0}")]
    NotPovm(String),
    #[error("not a PVM: {0}")]
    NotPvm(String),
    #[error("algebra is degenerate: {0}")]
    Degenerate(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("search cap exceeded: {vertices} vertices > cap {cap}")]
    CapExceeded { vertices: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
