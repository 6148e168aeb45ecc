use oamswap::SwapError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(e: SwapError) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Only genuine numerical breakdowns exit with 3; anything else the library
/// rejects traces back to the inputs.
impl From<SwapError> for CliError {
    fn from(e: SwapError) -> Self {
        match e {
            SwapError::Numerical(_) | SwapError::EmptySpectrum => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
