use chaoscalc::ChaosError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Chaos(ChaosError::InvalidArgument(_)) => 2,
            CliError::Chaos(ChaosError::Integrability { .. } | ChaosError::Independence { .. }) => 3,
            CliError::Chaos(ChaosError::TruncationOverflow { .. } | ChaosError::TooLarge(_)) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
