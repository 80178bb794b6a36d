use std::fmt;

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs detected before computation (exit 1).
    Usage(anyhow::Error),
    /// IO, parse or numerical failure (exit 2).
    Compute(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Compute(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<netmf_inversion::Error> for CliError {
    fn from(e: netmf_inversion::Error) -> Self {
        CliError::Compute(e.into())
    }
}

/// Builds a usage error from a message.
pub fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(anyhow::anyhow!("{msg}"))
}
