use std::fmt;

use etpa_core::atomic::AtomicDataError;
use etpa_core::biphoton::BiphotonError;
use etpa_core::finder::FinderError;
use etpa_core::plasma::PlasmaError;
use etpa_core::quantities::QuantityError;
use etpa_core::rates::RateError;

/// Input and configuration problems exit with 2, numerical failures with 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    /// stdout was closed by the reader; not reported.
    BrokenPipe,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Input, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Numerical, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::BrokenPipe => 0,
        }
    }

    pub fn is_broken_pipe(&self) -> bool {
        self.kind == ErrorKind::BrokenPipe
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<QuantityError> for CliError {
    fn from(e: QuantityError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<AtomicDataError> for CliError {
    fn from(e: AtomicDataError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<BiphotonError> for CliError {
    fn from(e: BiphotonError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<RateError> for CliError {
    fn from(e: RateError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<FinderError> for CliError {
    fn from(e: FinderError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<PlasmaError> for CliError {
    fn from(e: PlasmaError) -> Self {
        match e {
            PlasmaError::Unreachable(_)
            | PlasmaError::Singular { .. }
            | PlasmaError::NegativePopulation { .. }
            | PlasmaError::ZeroRecombination { .. } => CliError::numerical(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError { kind: ErrorKind::BrokenPipe, message: e.to_string() };
        }
        CliError::input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => io.into(),
            other => CliError::input(format!("write failed: {other:?}")),
        }
    }
}
