use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("step-size error: {0}")]
    StepSize(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("pole error: {0}")]
    Pole(String),
}

pub type Result<T> = std::result::Result<T, Error>;

