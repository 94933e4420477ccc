use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("no report.json in {0}")]
    MissingReport(PathBuf),
    #[error("malformed report {path}: {msg}")]
    BadReport { path: PathBuf, msg: String },
    #[error("{0}")]
    Compute(lorentz_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(key: &str, msg: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for anything the user can fix in the invocation, 2 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 2,
            _ => 1,
        }
    }
}

impl From<lorentz_core::Error> for CliError {
    fn from(e: lorentz_core::Error) -> Self {
        use lorentz_core::Error as E;
        match e {
            E::InvalidParameter { key, msg } => CliError::Config { key, msg },
            E::ConditionViolated(msg) => CliError::config("metric", msg),
            E::NotConstructible(msg) => CliError::config("from", format!("endpoints not usable: {msg}")),
            e => CliError::Compute(e),
        }
    }
}
