use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {path}: {message}")]
    Config { path: String, message: String },

    #[error("cannot parse scenario: {0}")]
    Parse(String),

    #[error("unknown preset '{0}' (try `list`)")]
    UnknownPreset(String),

    #[error(transparent)]
    Core(#[from] onebit_mcrb::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(path: &str, message: &str) -> Self {
        CliError::Config { path: path.to_string(), message: message.to_string() }
    }
}
