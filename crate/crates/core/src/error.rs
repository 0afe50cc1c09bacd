use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("image shape {height}x{width} is not divisible by cell size {cell}")]
    ShapeNotDivisible {
        height: usize,
        width: usize,
        cell: usize,
    },
    #[error("intensity {0} outside [0, 255]")]
    IntensityOutOfRange(i64),
    #[error("grid size at index {index} is not strictly positive: {value}")]
    NonPositiveGridSize { index: usize, value: f64 },
    #[error("empty code")]
    EmptyCode,
    #[error("count overflow")]
    CountOverflow,
    #[error("bonus requested for a zero count")]
    ZeroCount,
    #[error("state-action counting requires an action")]
    MissingAction,
    #[error("invalid counter configuration: {0}")]
    InvalidCounter(String),
    #[error("noise amplitude {0} must exceed 1/4")]
    NoiseTooSmall(f64),
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid environment size: {0}")]
    InvalidSize(String),
    #[error("goal is unreachable from the start cell")]
    UnreachableGoal,
    #[error("goal radius {0} must lie in (0, 0.5)")]
    InvalidRadius(f64),
    #[error("step called after the episode ended")]
    StepAfterDone,
    #[error("step called before reset")]
    StepBeforeReset,
    #[error("action {action} out of range for {action_count} actions")]
    InvalidAction { action: usize, action_count: usize },
    #[error("observation kind not supported by this hasher: {0}")]
    UnsupportedObservation(&'static str),
    #[error("invalid learning rate: {0}")]
    InvalidLearningRate(f64),
    #[error("config error: {key}: {reason}")]
    Config { key: String, reason: String },
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("pipeline ordering violated: {0}")]
    Ordering(&'static str),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
