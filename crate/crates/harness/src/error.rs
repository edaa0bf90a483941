use thiserror::Error;

use spikes_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Argument(_) | CoreError::Domain(_) | CoreError::Config(_) | CoreError::Unsupported(_) => {
                HarnessError::Config(e.to_string())
            }
            CoreError::Statistics(_) => HarnessError::Statistics(e.to_string()),
            CoreError::StepSize(_) | CoreError::Numerical(_) | CoreError::Pole(_) => {
                HarnessError::Numerical(e.to_string())
            }
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(std::io::Error::other(e))
    }
}

impl HarnessError {
    /// 0 success, 1 verify failure, 2 config (and I/O), 3 statistics, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Verify(_) => 1,
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::Statistics(_) => 3,
            HarnessError::Numerical(_) => 4,
        }
    }
}
