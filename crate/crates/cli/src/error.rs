use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] hdlda_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// The reader of standard output went away, as with `hdlda ... | head`.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) => Some(e),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    /// 1 for numerical failures, 2 for anything the caller got wrong.
    pub fn exit_code(&self) -> ExitCode {
        use hdlda_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input(_) => ExitCode::from(2),
            CliError::Core(E::InvalidDims(_) | E::InvalidParameter { .. } | E::DimensionMismatch { .. }) => {
                ExitCode::from(2)
            }
            CliError::Core(_) => ExitCode::from(1),
            CliError::Io(_) | CliError::Csv(_) => ExitCode::from(2),
        }
    }
}
