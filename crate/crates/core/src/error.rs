use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error("invalid dimensions n={n}, r={r}: need 1 <= r <= n")]
    InvalidDimensions { n: usize, r: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("multi-index sums to {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix is not positive semidefinite: most negative eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("value block is singular: smallest eigenvalue {0:e}")]
    SingularBlock(f64),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("integrand not integrable: {0}")]
    Integrability(String),
}

pub type Result<T> = std::result::Result<T, NodalError>;
