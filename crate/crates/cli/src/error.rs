use hillcert_core::HillError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("certificate not applicable: {0}")]
    Certificate(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Certificate(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<HillError> for CliError {
    fn from(e: HillError) -> Self {
        match e {
            HillError::InvalidEnvelope { .. } => CliError::Certificate(e.to_string()),
            HillError::Domain(_) | HillError::Stiffness { .. } | HillError::Convergence { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
