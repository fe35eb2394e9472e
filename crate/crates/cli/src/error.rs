use std::path::PathBuf;

use crate::config::Stage;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: cbct_radon::Error,
    },
    #[error("stage {stage}: {} was written by config {found}, current config is {expected}", path.display())]
    HashMismatch {
        stage: Stage,
        path: PathBuf,
        found: String,
        expected: String,
    },
    #[error("stage {stage}: {message}")]
    Invalid { stage: Stage, message: String },
    #[error("stage {stage}: cannot write {}: {source}", path.display())]
    Io {
        stage: Stage,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) trait StageContext<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> StageContext<T> for cbct_radon::Result<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError::Stage { stage, source })
    }
}
