//! Error type shared by all kernels and solvers.

use std::path::PathBuf;

/// Crate-wide error type.
///
/// The three numerical variants map onto the CLI exit-code contract:
/// `InvalidInput` is a validation failure (exit 1), `Conditioning` and
/// `Numeric` are numerical failures (exit 2), `Io` is an I/O failure
/// (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A linear system or factorization was too ill-conditioned to trust.
    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    /// A numerical routine failed outright (LAPACK error, non-finite iterate).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// File I/O failed; the path is kept for context.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn conditioning(msg: impl Into<String>) -> Self {
        Error::Conditioning(msg.into())
    }
}
