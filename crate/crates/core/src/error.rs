use thiserror::Error;

/// Library-wide error type.
///
/// `Usage` marks bad parameters or malformed input files, `Numerical` marks
/// algorithmic failures (non-convergence, failed factorizations) and carries
/// the best value reached so the caller can still inspect partial progress.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        /// Best objective value reached before giving up, when one exists.
        best: Option<f64>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            message: msg.into(),
            best: None,
        }
    }

    pub fn numerical_with_best(msg: impl Into<String>, best: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            best: Some(best),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
