use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fhsim_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use fhsim_core::Error as E;
        match self {
            Error::Core(
                E::NearSingular { .. }
                | E::EigenvalueProximity { .. }
                | E::ContourCollision { .. }
                | E::NotPositiveDefinite
                | E::AmbiguousTarget { .. },
            ) => 2,
            Error::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}
