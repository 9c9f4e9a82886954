use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("shape mismatch: {0}")]
    InvalidShape(String),
    #[error("non-positive value {value} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncation index {k} out of range for rank {p}")]
    InvalidTruncation { k: usize, p: usize },
    #[error("ridge schedule does not match the spectral family: {0}")]
    ScheduleMismatch(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("gram matrix is numerically zero")]
    SingularGram,
    #[error("tail gram A_k is singular at k = {k}")]
    DegenerateTail { k: usize },
    #[error("head gram is singular at k = {k}")]
    DegenerateHead { k: usize },
    #[error("no truncation index in the grid produced a valid bound")]
    NoValidTruncation,
    #[error("configurations differ beyond the feature family: {0}")]
    ConfigMismatch(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InvalidMatrix(_)
                | Error::SingularGram
                | Error::DegenerateTail { .. }
                | Error::DegenerateHead { .. }
                | Error::NoValidTruncation
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
