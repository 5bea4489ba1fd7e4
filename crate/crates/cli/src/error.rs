use std::path::PathBuf;

use thiserror::Error;
use uavbeacon_core::{DecodeError, EncodeError, LinkError, ModelError, SimError, StatsError};

pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Integrity(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Input(_) => EXIT_INPUT,
            CliError::Integrity(_) => EXIT_INTEGRITY,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LinkError> for CliError {
    fn from(e: LinkError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        CliError::Input(format!("invalid report: {e}"))
    }
}

/// Malformed input is an input error; a well-formed frame that fails its
/// checksum or carries impossible fields is an integrity error.
impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        let class = match e {
            DecodeError::BadLength(_) => "bad-length",
            DecodeError::BadAlphabet { .. } => "bad-alphabet",
            DecodeError::CrcMismatch { .. } => "crc-mismatch",
            DecodeError::InvalidField(_) => "invalid-field",
        };
        let msg = format!("decode failed ({class}): {e}");
        match e {
            DecodeError::BadLength(_) | DecodeError::BadAlphabet { .. } => CliError::Input(msg),
            DecodeError::CrcMismatch { .. } | DecodeError::InvalidField(_) => CliError::Integrity(msg),
        }
    }
}
