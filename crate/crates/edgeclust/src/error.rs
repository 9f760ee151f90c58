use std::path::PathBuf;

use edgeclust_core::Error as CoreError;

pub type AppResult<T> = Result<T, AppError>;

/// Failure of a pipeline stage or CLI command, with the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("bad config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Core {
        stage: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Data { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// 2 bad config, 3 data error, 4 solver non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Core { source, .. } => match source {
                CoreError::NotConverged(_) | CoreError::Solver(_) => 4,
                CoreError::InvalidParameter(_) | CoreError::TooLarge { .. } => 2,
                _ => 3,
            },
            AppError::Data { .. } | AppError::Io { .. } => 3,
        }
    }
}

/// Tags a core error with the stage that produced it.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> AppResult<T>;
}

impl<T> StageExt<T> for Result<T, CoreError> {
    fn stage(self, stage: &'static str) -> AppResult<T> {
        self.map_err(|source| AppError::Core { stage, source })
    }
}
