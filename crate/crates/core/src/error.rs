use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no observations")]
    Empty,

    #[error("degenerate input: all {n} observations equal {value}")]
    Degenerate { n: usize, value: u64 },

    #[error("too few excesses: {count} (need at least {required})")]
    TooFewExcesses { count: usize, required: usize },

    #[error("non-positive observation {value} at index {index}")]
    NonPositive { index: usize, value: f64 },

    #[error("poisson intensity {0} is not a finite value below the count range")]
    PoissonOverflow(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
