use thiserror::Error;

/// Command failure, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input. Exit code 2.
    #[error("input error: {0}")]
    Input(String),
    /// A numerical or structural failure. Exit code 3.
    #[error("{}", match .stage {
        Some(stage) => format!("numerical failure in stage {stage}: {message}"),
        None => format!("numerical failure: {message}"),
    })]
    Numerical { stage: Option<&'static str>, message: String },
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn input_from(e: ncpqec::Error) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError::Numerical { stage: None, message: message.into() }
    }

    pub fn numerical_from(e: ncpqec::Error) -> Self {
        CliError::numerical(e.to_string())
    }

    pub fn at_stage(stage: &'static str, message: impl Into<String>) -> Self {
        CliError::Numerical { stage: Some(stage), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}
