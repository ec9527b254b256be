use thiserror::Error;

/// Errors raised by bound computation, sampling and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate noise: {0}")]
    DegenerateNoise(String),

    #[error("sampling rate {sample_rate} Hz is below twice the bandwidth {bandwidth} Hz")]
    Undersampled { bandwidth: f64, sample_rate: f64 },

    #[error("the mean of the quantized data vanishes, the ambiguity function is undefined")]
    DegenerateMaf,

    #[error("data vector is identically zero")]
    DegenerateData,

    #[error("{0} is singular")]
    Singular(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("misuse: {0}")]
    Misuse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
