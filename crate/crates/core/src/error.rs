use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no observations")]
    NoObservations,

    #[error("invalid time {0}: observation times must be positive and finite")]
    InvalidTime(f64),

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("cannot evaluate a survival curve at negative time {0}")]
    NegativeTime(f64),

    #[error("knot index {index} out of range for {len} knots")]
    KnotOutOfRange { index: usize, len: usize },

    #[error("EM ratio undefined: previous iterate is zero at censored time {0}")]
    EmRatioUndefined(f64),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("CI undefined at x = {0}")]
    CiUndefined(f64),

    #[error("band undefined: variance diverges in interval (at time {0})")]
    BandDiverges(f64),

    #[error(
        "band undefined: Ĥ(x1) = 0 at x1 = {0}; start the band at or after the first event time"
    )]
    BandStartsAtZero(f64),

    #[error("no knots of the fit fall inside [{0}, {1}]")]
    EmptyBandInterval(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
