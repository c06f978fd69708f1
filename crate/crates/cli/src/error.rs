use std::fmt;

/// Failure of a CLI command, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad function spec, flag value, config file or unreadable input.
    Invalid(String),
    /// An operator or functional rejected its arguments.
    Domain(String),
    /// `verify` ran but some criteria failed.
    Failed(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            CliError::Invalid(m) | CliError::Domain(m) | CliError::Failed(m) => m,
        };
        // Keep diagnostics on one line.
        write!(f, "{}", msg.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<fraccalc::Error> for CliError {
    fn from(e: fraccalc::Error) -> Self {
        match e {
            fraccalc::Error::Invalid(_) => CliError::Invalid(e.to_string()),
            fraccalc::Error::Domain(_) | fraccalc::Error::Divergent(_) => CliError::Domain(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
