use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] qpt_core::Error),

    #[error("check failed: {0}")]
    Failed(String),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// Process exit status: 2 for bad configuration, 3 for a violated invariant
    /// or failed certification, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        use qpt_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 3,
            CliError::Output(_) => 1,
            CliError::Core(e) => match e {
                E::Invariant(_) | E::Certification(_) | E::MissingCertificate => 3,
                _ => 2,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
