use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

/// Failure to read, parse or validate an input file.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: at `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl FileError {
    pub fn invalid(path: &Path, message: impl Into<String>) -> Self {
        FileError::Invalid { path: path.to_path_buf(), message: message.into() }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|source| FileError::Io { path: path.to_path_buf(), source })
}

/// Deserializes `text`, reporting the failing field path with line and column.
pub(crate) fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, FileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        FileError::Parse {
            path: path.to_path_buf(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: strip_position(&inner.to_string()),
        }
    })
}

pub(crate) fn parse_value<T: DeserializeOwned>(path: &Path, value: serde_json::Value) -> Result<T, FileError> {
    serde_path_to_error::deserialize(value).map_err(|e| FileError::Parse {
        path: path.to_path_buf(),
        line: 0,
        column: 0,
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Error of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or configuration values.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] FileError),
    /// Failure while executing a valid request.
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}
