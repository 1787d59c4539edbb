use thiserror::Error;

/// Problems detected while validating a forced delay system.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("tau*omega/(2*pi) = {ratio} is not a positive integer; stroboscopic averaging does not apply")]
    NonStroboscopic { ratio: f64 },
    #[error("mode set is empty or lacks the k = 0 mode")]
    EmptyModeSet,
    #[error("dimension mismatch: {what} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Failures of the Runge-Kutta and method-of-steps integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size {h:e} at t = {t} fell below the underflow threshold")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("exceeded the maximum of {max} steps before reaching t = {t_end}")]
    MaxStepsExceeded { max: usize, t_end: f64 },
    #[error("time {t} lies outside the solution span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
    #[error("delayed argument at t = {t} is outside the history and the computed solution")]
    HistoryEvaluationOutOfRange { t: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(&'static str),
    #[error("right-hand side produced a non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

/// Failures raised while building or evaluating averaged right-hand sides.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AveragingError {
    #[error("letter {0} is not a represented mode index")]
    UnrepresentedLetter(i32),
    #[error("word of length {len} exceeds the maximum depth {max}")]
    DepthExceeded { len: usize, max: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors of the segmented (non-delay) reformulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentationError {
    #[error("number of delay intervals must be at least 1, got {0}")]
    InvalidIntervalCount(usize),
    #[error("junction {index}: segments differ by {mismatch:e} (limit {limit:e})")]
    ContinuityViolation {
        index: usize,
        mismatch: f64,
        limit: f64,
    },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
