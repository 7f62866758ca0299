//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration (thresholds, counts, ranges) is internally inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Order statistics too close together for the three-point tail fit.
    #[error("degenerate spacing: {0}")]
    DegenerateSpacing(String),

    /// A point and an event disagree on dimension.
    #[error("dimension mismatch: event has dimension {expected}, point has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Sampled membership along the scaling path is not monotone.
    #[error("monotonicity violation along scaling path")]
    MonotonicityViolation,

    /// No ray from the origin enters the event within the scale cap.
    #[error("empty event: no direction enters the event within the search range")]
    EmptyEvent,

    /// Input data could not be used (I/O, parse, empty after filtering).
    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
