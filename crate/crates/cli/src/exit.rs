use std::fmt;
use std::process::ExitCode;

use tailgini::Error;

/// Exit statuses, one per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Usage = 2,
    Parse = 3,
    Contract = 4,
    Io = 5,
    Numerical = 6,
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            status: Status::Usage,
            message: message.into(),
        }
    }

    /// Prefixes the message with the offending file; parse errors already
    /// carry it.
    pub fn context(mut self, path: &std::path::Path) -> Self {
        if self.status == Status::Parse {
            return self;
        }
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.status as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn classify(e: &Error) -> Status {
    match e.root() {
        Error::Parse { .. } => Status::Parse,
        Error::Io(_) => Status::Io,
        Error::Divergent(_) | Error::NonConvergence(_) | Error::NonPositiveEta(_) | Error::TooManyFailures { .. } => {
            Status::Numerical
        }
        _ => Status::Contract,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            status: classify(&e),
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
