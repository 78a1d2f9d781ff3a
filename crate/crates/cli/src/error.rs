use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key '{key}': {message}")]
    Config { key: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] adsv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn config_err<T>(key: &str, message: impl Into<String>) -> Result<T> {
    Err(CliError::Config { key: key.to_string(), message: message.into() })
}
