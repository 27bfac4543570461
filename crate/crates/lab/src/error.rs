use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}, row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] rtp_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn row(path: impl Into<PathBuf>, row: usize, message: impl Into<String>) -> Self {
        LabError::Row {
            path: path.into(),
            row,
            message: message.into(),
        }
    }

    /// 2 for anything the user can fix in their input, 3 for model failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Model(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
