use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AugmentError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// A config key failed to parse or violates a `PipelineConfig` invariant.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("unknown preset `{0}` (expected one of S1, S2, S3, default)")]
    UnknownPreset(String),

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("replay mismatch: {0}")]
    Replay(String),

    #[error("image `{path}`: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl AugmentError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AugmentError::InvalidParameter(msg.into())
    }

    pub fn config(key: &str, msg: impl Into<String>) -> Self {
        AugmentError::Config {
            key: key.to_string(),
            message: msg.into(),
        }
    }

    /// The config key this error is attributed to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            AugmentError::Config { key, .. } => Some(key),
            _ => None,
        }
    }
}
