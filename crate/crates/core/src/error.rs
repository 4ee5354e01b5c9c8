use std::path::PathBuf;

use thiserror::Error;

use crate::outbreak::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid outbreak: {}", join_violations(.0))]
    InvalidOutbreak(Vec<Violation>),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}line {line}: {message}", display_path(.path))]
    Parse {
        path: Option<PathBuf>,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by the runtime.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidOutbreak(_)
                | Error::InvalidData(_)
                | Error::InvalidModel(_)
                | Error::InvalidPrior(_)
                | Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::Json(_)
        )
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn display_path(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}
