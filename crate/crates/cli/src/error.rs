use std::fmt;

use afqsp_core::Error as CoreError;

/// Everything that stops a run, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// At least one per-row contract failed. Results were still written.
    ContractFailure { failed: usize, total: usize },
    MalformedConfig(String),
    UnknownFunction(String),
    Unsupported(String),
    /// The computation itself failed, or results could not be written.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ContractFailure { .. } => 1,
            CliError::MalformedConfig(_) => 2,
            CliError::UnknownFunction(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Runtime(_) => 5,
        }
    }

    /// Catalog lookups fail either on the name or on its parameters.
    pub fn from_lookup(e: CoreError) -> Self {
        match e {
            CoreError::UnknownFunction(name) => CliError::UnknownFunction(name),
            other => CliError::MalformedConfig(other.to_string()),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::ContractFailure { failed, total } => write!(f, "{failed} of {total} rows failed their contract"),
            CliError::MalformedConfig(msg) => write!(f, "malformed config: {msg}"),
            CliError::UnknownFunction(name) => write!(f, "unknown function `{name}`"),
            CliError::Unsupported(msg) => write!(f, "unsupported combination: {msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}
