use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] wpl_core::Error),

    #[error("numeric abort: {0}")]
    NumericAbort(String),
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 3 for numeric
    /// failures during a run, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use wpl_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Config(_) | E::Domain(_) | E::Structural(_)) => 2,
            CliError::Core(_) | CliError::NumericAbort(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
