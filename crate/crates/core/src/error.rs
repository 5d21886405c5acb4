use std::path::PathBuf;

use crate::rigor::Enclosure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not coprime: gcd({value}, {modulus}) != 1")]
    NotCoprime { value: u64, modulus: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested estimate is only valid above a level floor.
    #[error("level {level} is below the regime floor {floor} for {what}")]
    Regime { what: &'static str, level: u64, floor: u64 },

    #[error("unsupported twist index m = {0} (only 1 and 2 are supported)")]
    UnsupportedTwist(u64),

    #[error("level {0} is not prime")]
    Composite(u64),

    #[error("budget exceeded: {reason}")]
    Budget { reason: String, partial: Option<Enclosure> },

    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("fetch failed for {url}: {message}")]
    Fetch { url: String, message: String },

    #[error("cache integrity check failed for {path}: expected {expected}, found {found}")]
    Integrity { path: PathBuf, expected: String, found: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing Hecke eigenvalue a_{0}")]
    MissingCoefficient(u64),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
