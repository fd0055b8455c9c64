use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] mfrate_core::Error),
}

impl HarnessError {
    /// 2 for configuration and capacity problems, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use mfrate_core::Error as E;
        match self {
            HarnessError::Config(_) | HarnessError::Toml(_) => 2,
            HarnessError::Core(E::Capacity(_) | E::Domain(_) | E::InvalidDistribution(_) | E::Parse(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
