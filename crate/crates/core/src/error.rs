use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid anisotropy: {0}")]
    InvalidAnisotropy(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("non-finite value after {iteration} Bregman iterations")]
    NonFinite { iteration: usize },
    #[error("point is not on the surface (residual {0:e})")]
    NotOnSurface(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
