use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (unknown ids, bad parameters, parse failures).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input outside the domain of an operation (empty populations, length mismatches, NaN).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the user's configuration rather than by the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
