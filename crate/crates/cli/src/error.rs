use std::path::PathBuf;

use thiserror::Error;

use crate::config::Violation;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {}{}: {message}", path.display(), line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    ConfigParse { path: PathBuf, line: Option<usize>, message: String },

    #[error("invalid configuration:{}", .0.iter().map(|v| format!("\n  {v}")).collect::<String>())]
    Invalid(Vec<Violation>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config is for `{found}` but the command runs `{expected}`")]
    KindMismatch { expected: String, found: String },

    #[error(transparent)]
    Core(#[from] kicktop::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigParse { .. } | CliError::Invalid(_) | CliError::KindMismatch { .. } => 2,
            _ => 1,
        }
    }
}
