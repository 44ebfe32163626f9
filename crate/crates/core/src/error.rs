use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("zero vector: {0}")]
    ZeroVector(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sampling failed after {0} retries")]
    SamplingFailed(usize),

    #[error("membership oracle is inconsistent: {0}")]
    InconsistentOracle(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown catalog state `{0}`")]
    UnknownState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
