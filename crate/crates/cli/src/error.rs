use serde_json::json;
use thiserror::Error;

/// Failures surfaced by the command line, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("chain {chain} declared an error after {flips} flips")]
    Truncation { chain: u64, flips: u64 },
    #[error(transparent)]
    Library(fixnode::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<fixnode::Error> for CliError {
    fn from(e: fixnode::Error) -> Self {
        use fixnode::Error as E;
        match e {
            E::InvalidArgument(_) | E::LengthMismatch(..) | E::SectorCapExceeded { .. } | E::Json(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Library(other),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 4,
            CliError::Validation(_) => 2,
            CliError::Truncation { .. } => 3,
            CliError::Library(_) | CliError::Io(_) => 1,
        }
    }

    /// One-line JSON reason for stderr.
    pub fn reason(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Validation(_) => "validation",
            CliError::Truncation { .. } => "error_declared",
            CliError::Library(fixnode::Error::AbsorbingState(_)) => "absorbing_state",
            CliError::Library(_) => "library",
            CliError::Io(_) => "io",
        };
        let mut v = json!({ "error": kind, "message": self.to_string() });
        match self {
            CliError::Truncation { chain, flips } => {
                v["chain"] = json!(chain);
                v["flips"] = json!(flips);
            }
            CliError::Library(fixnode::Error::AbsorbingState(x)) => {
                v["state"] = json!(x.to_hex());
            }
            _ => {}
        }
        v
    }
}
