use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A fractal model parameter bundle violates one of its invariants.
    #[error("invalid model: {0}")]
    Model(String),

    /// A spectrum request or batch is malformed.
    #[error("invalid spectrum: {0}")]
    Spectrum(String),

    /// A decimation configuration is inconsistent or produced an invalid preimage.
    #[error("decimation config: {0}")]
    Decimation(String),

    /// A request exceeds a configured resource cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An argument lies outside the domain where the operation is defined.
    #[error("domain: {0}")]
    Domain(String),

    /// An iterative or quadrature procedure failed to reach its tolerance.
    #[error("numeric non-convergence: {0}")]
    NonConvergence(String),

    /// A configuration file could not be parsed or validated.
    #[error("config: {0}")]
    Config(String),

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
