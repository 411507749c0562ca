use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    /// The run completed but at least one pass/fail check failed.
    pub const CHECK_FAILED: i32 = 1;
    /// Command line or configuration file could not be parsed.
    pub const CONFIG: i32 = 2;
    /// A parameter violates an operation's precondition.
    pub const PRECONDITION: i32 = 3;
    /// Reading or writing a file failed.
    pub const IO: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },
    #[error("{}", precondition_message(param, source))]
    Precondition { param: String, source: dilab_core::Error },
    #[error("missing parameter `{0}`")]
    Missing(String),
    #[error("{action} {}: {source}", path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

/// `invalid parameter `pack.n`: must be at least 2` from the config key and the core error.
fn precondition_message(param: &str, source: &dilab_core::Error) -> String {
    match source {
        dilab_core::Error::InvalidParameter { name, reason } => {
            let key = if param.ends_with(name) {
                param.to_string()
            } else {
                format!("{param}.{name}")
            };
            format!("invalid parameter `{key}`: {reason}")
        }
        other => format!("invalid parameter `{param}`: {other}"),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Precondition { .. } | CliError::Missing(_) => exit::PRECONDITION,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub(crate) fn io(action: &'static str, path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { action, path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches the config key that fed a failing core call.
pub(crate) trait Context<T> {
    fn param(self, name: &str) -> Result<T>;
}

impl<T> Context<T> for dilab_core::Result<T> {
    fn param(self, name: &str) -> Result<T> {
        self.map_err(|source| CliError::Precondition {
            param: name.to_string(),
            source,
        })
    }
}
