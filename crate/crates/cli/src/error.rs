use std::path::PathBuf;

use qca_anomaly::ErrorKind;

/// Errors of a run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration at {path}: {reason}")]
    Validation { path: String, reason: String },
    #[error(transparent)]
    Core(#[from] qca_anomaly::Error),
    #[error("{context}: {reason}")]
    Check { context: String, reason: String },
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PIPELINE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

impl CliError {
    /// 1 for bad input, 2 for pipeline and I/O failures, 3 for violated invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => EXIT_VALIDATION,
                ErrorKind::Pipeline => EXIT_PIPELINE,
                ErrorKind::Internal => EXIT_INTERNAL,
            },
            CliError::Check { .. } | CliError::Io { .. } => EXIT_PIPELINE,
        }
    }
}
