use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A discount or environment parameter lies outside its mathematical domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// An experiment, planner or CLI setting is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("state index {index} is not valid for a chain of length {n}")]
    InvalidState { index: usize, n: usize },

    #[error("action {action} is not valid, environment has {num_actions} actions")]
    InvalidAction { action: usize, num_actions: usize },

    #[error("search tree is empty; planning must run before plan extraction")]
    EmptyTree,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Configuration-class errors map to exit status 2 in the CLI, everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }
}
