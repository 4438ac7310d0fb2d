use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] wadebench_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { source_name: source_name.to_string(), line, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    /// Stable short code used as the prefix of CLI error messages.
    pub fn code(&self) -> &'static str {
        use wadebench_core::Error as C;
        match self {
            Error::Core(C::Config(_)) => "config",
            Error::Core(C::Shape { .. }) => "shape",
            Error::Core(C::Index { .. }) => "index",
            Error::Core(C::Vocabulary(_)) => "vocabulary",
            Error::Core(C::Format { .. }) | Error::Parse { .. } | Error::Json(_) => "format",
            Error::Core(C::UndefinedAccuracy) => "undefined-accuracy",
            Error::Core(C::Diverged { .. }) => "diverged",
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
