use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("{0}")]
    Compute(#[from] pshardy_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    /// Process exit status: 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) => 1,
            CliError::Compute(pshardy_core::Error::NotConverged { .. }) => 2,
            CliError::Compute(_) => 1,
            CliError::Io { .. } | CliError::Serialize(_) => 1,
        }
    }
}
