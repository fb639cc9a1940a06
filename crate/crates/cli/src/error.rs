use std::io;
use std::path::PathBuf;

use resaudit_core::AuditError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ADAPTER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Audit(#[from] AuditError),

    #[error("{0}")]
    Usage(String),

    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("CSV: {0}")]
    Csv(String),

    #[error("invalid plot document: {0}")]
    Document(String),

    #[error("output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Audit(e) if e.is_adapter_error() => EXIT_ADAPTER,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
