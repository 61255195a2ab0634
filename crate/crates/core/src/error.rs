use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate}, residual {residual:e})")]
    NoConvergence {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:e}, allowed {allowed:e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("family is not orthogonal: max cross norm {max_cross:e} exceeds {allowed:e}")]
    NotOrthogonalFamily { max_cross: f64, allowed: f64 },

    #[error("vector {index} has zero norm")]
    ZeroVector { index: usize },

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty {0}")]
    Empty(&'static str),
}
