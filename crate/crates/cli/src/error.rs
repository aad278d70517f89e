use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Usage, parse or validation error.
    pub const INPUT: i32 = 1;
    /// Every stratum had incompatible evidence.
    pub const INCOMPATIBLE: i32 = 2;
    /// The proposition harness found a counterexample.
    pub const COUNTEREXAMPLE: i32 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        exit::INPUT
    }
}
