use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] satcycles::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit code: 2 for regime refusals, 3 for numerical failures,
    /// 4 for I/O and 1 for bad input.
    pub fn exit_code(&self) -> i32 {
        use satcycles::Error as E;
        match self {
            CliError::Core(E::CenterRegime(_) | E::BadRegime { .. } | E::AtBifurcation { .. }) => 2,
            CliError::Core(
                E::NoConvergence { .. }
                | E::CountUnstable { .. }
                | E::BracketFailed { .. }
                | E::OrderViolated
                | E::SwitchCapExceeded { .. },
            ) => 3,
            CliError::Core(_) | CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Csv(_) => 4,
        }
    }
}
