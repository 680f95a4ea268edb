use std::process::ExitCode;

use thiserror::Error;

/// Command failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub const CONFIG_CODE: u8 = 3;
    pub const DATA_CODE: u8 = 4;
    pub const NUMERICAL_CODE: u8 = 5;
    pub const IO_CODE: u8 = 6;

    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => Self::CONFIG_CODE,
            CliError::Data(_) => Self::DATA_CODE,
            CliError::Numerical(_) => Self::NUMERICAL_CODE,
            CliError::Io(_) => Self::IO_CODE,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub(crate) fn numerical(e: ihtc_core::Error) -> Self {
        match e {
            ihtc_core::Error::Io(e) => CliError::Io(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }

    pub(crate) fn io(what: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", what.display()))
    }
}
