use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tensor space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("partial trace needs at least one kept factor")]
    EmptyKeep,

    #[error("factor index {index} out of range for {count} factors")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dense dimension {dim} exceeds the limit of {limit}; lower the Fock cutoff")]
    TooLarge { dim: usize, limit: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("engine disagreement {disagreement:e} exceeds {tolerance:e} at {location}")]
    EngineDisagreement {
        disagreement: f64,
        tolerance: f64,
        location: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
