use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("inputs live on different grids")]
    GridMismatch,
    #[error("invalid scale {0}: must be positive")]
    InvalidScale(f64),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative radicand {value:e} at frequency {xi}")]
    NegativeRadicand { xi: f64, value: f64 },
    #[error("zero denominator with nonzero numerator")]
    ZeroDenominator,
    #[error("no contraction at alpha={alpha}, beta={beta}: residual ratio {ratio}")]
    NoContraction { alpha: f64, beta: f64, ratio: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
