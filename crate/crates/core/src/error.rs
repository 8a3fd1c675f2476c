use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions or support signatures do not line up.
    #[error("shape error: {0}")]
    Shape(String),
    /// An argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A matrix or probability vector failed numeric validation.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The requested computation exceeds a fixed size guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An oracle precondition (coverage, refinement stability) failed.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A cluster is too small for a per-cluster density fit.
    #[error("cluster {cluster} has {size} members, at least {min} required")]
    Undersized { cluster: usize, size: usize, min: usize },
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse { row: usize, column: String, message: String },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Wraps the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
