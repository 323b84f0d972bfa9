use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Config(burgers_fsi::Error),

    #[error("solver failure: {0}")]
    Solver(burgers_fsi::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} acceptance criteria failed")]
    VerificationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 config or usage, 2 solver, 3 I/O, 4 failed
    /// verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io { .. } => 3,
            CliError::VerificationFailed { .. } => 4,
        }
    }
}

impl From<burgers_fsi::Error> for CliError {
    fn from(e: burgers_fsi::Error) -> Self {
        use burgers_fsi::Error as E;
        match e {
            E::InvalidConfig(_) | E::ConfigParse(_) | E::Evaluation { .. } => CliError::Config(e),
            E::DegenerateStudy(_) | E::NotApplicable(_) => CliError::Usage(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}
