use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("inconsistent inputs: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Core(#[from] densemocap_core::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(path: &Path, message: impl ToString) -> Self {
        Error::Parse { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn config(field: &str, message: impl ToString) -> Self {
        Error::Config { field: field.to_string(), message: message.to_string() }
    }

    /// 2 for unreadable or invalid input, 3 for inputs that do not belong
    /// together, 4 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use densemocap_core::Error as E;
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Config { .. } => 2,
            Error::Mismatch(_) => 3,
            Error::Core(E::NonFinite { .. } | E::Initialization(_)) => 4,
            Error::Core(_) => 2,
        }
    }
}
