use thiserror::Error;

/// Errors produced while building, simulating or analysing a network.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("format error: {0}")]
    Format(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid pair ({0}, {1}): sites must differ")]
    InvalidPair(usize, usize),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("capacity exceeded: dimension {dim} is above the cap {cap}; reduce the attached sites")]
    Capacity { dim: usize, cap: usize },
    #[error("numerical instability at t = {time}: {detail}; try a smaller dt")]
    NumericalInstability { time: f64, detail: String },
    #[error("step too large: halving the step changed p_sink(t_final) by {change:e} (tolerance {tolerance:e})")]
    StepTooLarge { change: f64, tolerance: f64 },
    #[error("basis error: {0}")]
    Basis(String),
    #[error("window [{start}, {end}] is outside the trajectory range [{min}, {max}]")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        min: f64,
        max: f64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    /// True for failures that come from the integrator rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalInstability { .. } | Error::StepTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
