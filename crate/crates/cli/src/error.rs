use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Scenario(loracap_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(loracap_core::Error),
    #[error("{context} `{path}`: {source}")]
    Io { context: &'static str, path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 0 ok, 1 configuration, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Scenario(_) | CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) => 3,
        }
    }

    /// Sort core errors into configuration vs numerical.
    pub fn from_core(err: loracap_core::Error) -> Self {
        use loracap_core::Error as E;
        match err {
            E::QuadratureNonConvergence { .. } => CliError::Numerical(err),
            _ => CliError::Scenario(err),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
