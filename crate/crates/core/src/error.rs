use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("estimated memory footprint of {required} bytes exceeds budget of {budget} bytes")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
