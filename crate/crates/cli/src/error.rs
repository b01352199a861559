use std::path::PathBuf;

use solwave_core::SolwaveError;
use thiserror::Error;

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_NO_ROOT: u8 = 2;
pub const EXIT_INVALID_ARGS: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),

    #[error(transparent)]
    Model(#[from] SolwaveError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} verification check(s) failed")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::InvalidArgs(_) => EXIT_INVALID_ARGS,
            CliError::VerificationFailed(_) => EXIT_VERIFY_FAILED,
            CliError::Io { .. } => EXIT_NUMERICAL,
            CliError::Model(e) => match e {
                SolwaveError::NoRoot { .. }
                | SolwaveError::BracketFailure { .. }
                | SolwaveError::NotSimpleZero { .. } => EXIT_NO_ROOT,
                SolwaveError::InvalidArgument(_) | SolwaveError::DegenerateSystem { .. } => EXIT_INVALID_ARGS,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
