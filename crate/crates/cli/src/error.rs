use std::path::PathBuf;

use thiserror::Error;

/// Every failure the CLI can report. Each maps to one exit code and one
/// stable machine-readable code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Parse { .. } => 3,
            CliError::Validation(_) => 4,
            CliError::Runtime(_) => 5,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::Read { .. } => "E_READ",
            CliError::Parse { .. } => "E_PARSE",
            CliError::Validation(_) => "E_VALIDATION",
            CliError::Runtime(_) => "E_RUNTIME",
        }
    }

    /// `error[CODE]: message` on one line.
    pub fn render(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        format!("error[{}]: {msg}", self.code())
    }
}

impl From<popsched::SimError> for CliError {
    fn from(e: popsched::SimError) -> Self {
        use popsched::SimError;
        // A failed sweep point is classified by what went wrong inside it.
        let mut root = &e;
        while let SimError::SweepPoint { source, .. } = root {
            root = source;
        }
        match root {
            SimError::Invalid(_) | SimError::Graph(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
