use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The outcome has zero probability at every phase on the grid.
    #[error("zero-probability outcome {0}")]
    ImpossibleOutcome(String),

    #[error("circular mean undefined: resultant length {0:e}")]
    UndefinedMean(f64),

    /// The observable's mean does not vary at the working point.
    #[error("stationary point at phi = {working_point}: slope {slope:e}")]
    StationaryPoint { working_point: f64, slope: f64 },

    #[error("resource cap exceeded: {required} {what} > cap {cap}")]
    ResourceCap { what: &'static str, required: f64, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
