use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::kinematics::KinematicsError;
use crate::motion::MotionError;
use crate::risk::RiskError;
use crate::signal::SignalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    /// Any of the above, attributed to the file it came from.
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn in_file(self, path: impl AsRef<Path>) -> Self {
        Error::File {
            path: path.as_ref().to_path_buf(),
            source: Box::new(self),
        }
    }

    /// Innermost error with the file context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } => source.root(),
            other => other,
        }
    }

    /// Source line when the underlying error came from reading text.
    pub fn line(&self) -> Option<usize> {
        match self.root() {
            Error::Motion(e) => e.line(),
            Error::Kinematics(KinematicsError::BindingFile { line, .. })
            | Error::Dynamics(DynamicsError::TableFile { line, .. })
            | Error::Risk(RiskError::RuleFile { line, .. }) => Some(*line),
            _ => None,
        }
    }
}

/// Read a text file, attributing failures to its path.
pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_context_prefixes_the_message() {
        let e = Error::from(MotionError::Syntax {
            line: 8,
            message: "unexpected `}`".into(),
        })
        .in_file("walk.bvh");
        assert_eq!(e.to_string(), "walk.bvh: line 8: unexpected `}`");
        assert_eq!(e.line(), Some(8));
    }

    #[test]
    fn missing_file_names_the_path() {
        let e = read_text("/nonexistent/rules.json").unwrap_err();
        assert!(e.to_string().starts_with("/nonexistent/rules.json: "));
        assert_eq!(e.line(), None);
    }
}
