use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gapclique::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Property(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;
pub const EXIT_PROPERTY: u8 = 3;
pub const EXIT_IO: u8 = 4;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use gapclique::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::BudgetExceeded { .. } | E::Refused(_) | E::RetriesExhausted { .. } => EXIT_BUDGET,
                E::PropertyViolation(_) => EXIT_PROPERTY,
                E::Io(_) | E::Json(_) | E::Parse(_) => EXIT_IO,
                _ => EXIT_USAGE,
            },
            CliError::Config(_) => EXIT_USAGE,
            CliError::Property(_) => EXIT_PROPERTY,
            CliError::Io { .. } | CliError::Json { .. } => EXIT_IO,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn json(path: &std::path::Path, source: serde_json::Error) -> Self {
        CliError::Json {
            path: path.display().to_string(),
            source,
        }
    }
}
