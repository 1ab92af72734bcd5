use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Unreadable or invalid configuration; `key` names the offending entry.
    #[error("invalid config: {key}: {message}")]
    Config { key: String, message: String },

    #[error("invalid config: {0}")]
    Parse(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Core(#[from] tangentlab_core::Error),
}

impl LabError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config { key: key.into(), message: message.into() }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        LabError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config { .. } | LabError::Parse(_) | LabError::Schema(_) => 2,
            LabError::Core(tangentlab_core::Error::Config(_)) => 2,
            LabError::Io { .. } | LabError::Core(_) => 1,
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
