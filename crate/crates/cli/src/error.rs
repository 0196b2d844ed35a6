use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("oracle disagrees with the closed form in {0} case(s)")]
    OracleMismatch(usize),
    #[error("Bell optimizer did not converge in {0} row(s); partial output written")]
    NonConvergence(usize),
    #[error(transparent)]
    Core(#[from] thermocat::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use thermocat::Error as E;
        match self {
            CliError::BadParam(_) => 2,
            CliError::Core(
                E::BadVariance(_)
                | E::BadTransmittance(_)
                | E::NegativeTime(_)
                | E::BadMode { .. }
                | E::SameMode(_)
                | E::InvalidParameter(_),
            ) => 2,
            CliError::OracleMismatch(_) => 3,
            CliError::NonConvergence(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
