use thiserror::Error;

/// Failures of a command, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("solver blew up at node {node} (t = {time}): {detail}")]
    BlowUp { node: usize, time: f64, detail: String },

    #[error(transparent)]
    Solver(fmgt_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::BlowUp { .. } => 3,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<fmgt_core::Error> for CliError {
    fn from(e: fmgt_core::Error) -> Self {
        match e {
            fmgt_core::Error::BlowUp { node, time } => CliError::BlowUp { node, time, detail: e.to_string() },
            fmgt_core::Error::InvalidModel(m) => CliError::Config(m),
            other => CliError::Solver(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
