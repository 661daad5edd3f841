use thiserror::Error;

/// Errors raised by the library. Each variant names the violated precondition.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order must be a finite positive real, got {0}")]
    InvalidOrder(f64),
    #[error("weights must be finite and nonnegative, got {0}")]
    InvalidWeight(f64),
    #[error("measure has no positive mass")]
    ZeroMeasure,
    #[error("probability weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("divergence is infinite")]
    InfiniteDivergence,
    #[error("{what} needs {size} entries, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solver did not reach tolerance {tol} (best gap {gap})")]
    Unconverged { tol: f64, gap: f64 },
    #[error("root bracket failure: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
