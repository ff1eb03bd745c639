use thiserror::Error;

/// Errors raised by the simulation, estimation and planning routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid qubit count n = {0}: the database size must be 2^n with 1 <= n <= 62")]
    NonPowerOfTwoDomain(u32),
    #[error("marked index {index} is outside the database of size {size}")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("{marked} of {size} items marked: counting requires fewer than half the items marked")]
    AlphaTooLarge { marked: u64, size: u64 },
    #[error("state vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("marked fraction {0} is outside [0, 1/2)")]
    AlphaOutOfRange(f64),
    #[error("parameter `{name}` = {value} is out of range: {reason}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("dense dimension {size} exceeds the limit {max}")]
    DimensionTooLarge { size: usize, max: usize },
    #[error("integration step {0} must lie in (0, 0.1]")]
    StepTooLarge(f64),
    #[error("only the fourth-order one-step scheme is available, got order {0}")]
    UnsupportedScheme(u32),
    #[error("integration would take {steps} steps, above the guard of 1e9")]
    CostGuardExceeded { steps: f64 },
    #[error("norm drifted by {0:e} over the run")]
    NormDrift(f64),
    #[error("at least 1000 quadrature steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("overlap magnitude {0} exceeds 1")]
    NonPhysicalOverlap(f64),
    #[error("phase estimates must cover stages 1..=m exactly once: {0}")]
    InvalidStages(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("a scaling fit needs at least two points")]
    SlopeUndefined,
    #[error("malformed instance file: {0}")]
    InstanceFormat(String),
    #[error("malformed config: {0}")]
    ConfigFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::ParameterOutOfRange {
            name,
            value,
            reason,
        }
    }

    /// True for errors caused by I/O or unreadable input files rather than
    /// by parameters outside the supported ranges.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Json(_) | Error::InstanceFormat(_) | Error::ConfigFormat(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
