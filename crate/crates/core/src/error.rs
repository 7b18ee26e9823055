use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// Raised by the full-rank QR routines; callers fall back to the rotated factorization.
    #[error("matrix is rank deficient (rank {rank}, expected {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported penalty variant: {0}")]
    Unsupported(String),

    #[error("lambda {requested} is below the computed range; smallest valid lambda is {min}")]
    OutOfRange { requested: f64, min: f64 },

    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
