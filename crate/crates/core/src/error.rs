use std::path::PathBuf;

use thiserror::Error;

/// Library-wide error type. The CLI maps the variants to process exit codes:
/// configuration/contract problems exit 2, numerical failures 3, I/O 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called outside its contract (empty serving set,
    /// dimension mismatch, non-finite input, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A numerical routine failed after its documented recovery attempt.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// File I/O failure with the offending path.
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Contract(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_the_cli_contract() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(Error::Contract("x".into()).exit_code(), 2);
        assert_eq!(Error::Numerical("x".into()).exit_code(), 3);
        let io = Error::io("/nope", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(io.exit_code(), 4);
        assert!(io.to_string().contains("/nope"));
    }
}
