use std::fmt;

use hiercache::Error;

pub const FAILED: u8 = 1;
pub const CONFIG: u8 = 2;
pub const DEMAND: u8 = 3;
pub const DIVISIBILITY: u8 = 4;
pub const DECODE: u8 = 5;

/// An error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(CONFIG, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Demand(_) => DEMAND,
            Error::Divisibility(_) => DIVISIBILITY,
            Error::Reconstruct { .. } | Error::Decode { .. } => DECODE,
            _ => CONFIG,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(FAILED, format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(FAILED, format!("CSV error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
