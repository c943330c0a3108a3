use curemix::CureError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// unreadable, malformed or inconsistent input (exit 2)
    #[error("{0}")]
    Input(String),
    /// numerical failure of an estimator (exit 3)
    #[error("{0}")]
    Fit(String),
    /// output could not be written (exit 1)
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Fit(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

impl From<CureError> for CliError {
    fn from(e: CureError) -> Self {
        match e {
            CureError::InvalidInput(_) => CliError::Input(e.to_string()),
            _ => CliError::Fit(e.to_string()),
        }
    }
}
