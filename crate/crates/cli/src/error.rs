use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CAP: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wlab_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("bad basis: {0}")]
    Basis(serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(wlab_core::Error::CapExceeded { .. }) => EXIT_CAP,
            CliError::Core(wlab_core::Error::Verification(_)) => EXIT_FAIL,
            _ => EXIT_INPUT,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let cap = CliError::Core(wlab_core::Error::CapExceeded { what: "ball size", cap: 1 });
        assert_eq!(cap.exit_code(), EXIT_CAP);
        let fail = CliError::Core(wlab_core::Error::Verification("x".into()));
        assert_eq!(fail.exit_code(), EXIT_FAIL);
        let input = CliError::Core(wlab_core::Error::InvalidInput("x".into()));
        assert_eq!(input.exit_code(), EXIT_INPUT);
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_INPUT);
    }
}
