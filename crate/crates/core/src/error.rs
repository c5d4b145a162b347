use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate pub_id {0:?}")]
    DuplicatePubId(String),

    #[error("duplicate mention_id {0:?}")]
    DuplicateMentionId(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cohort too small to decile: {n} authors, need at least {min}")]
    CohortTooSmall { n: usize, min: usize },

    #[error("undefined Gini: {0}")]
    UndefinedGini(&'static str),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("matrix is not column-stochastic: column {column} sums to {sum}")]
    NotStochastic { column: usize, sum: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("mention {0:?} has no truth label")]
    MissingTruth(String),

    #[error("publication {0:?} referenced by a cluster is not in the corpus")]
    MissingPublication(String),

    #[error("mention {0:?} referenced by a cluster is not in the corpus")]
    MissingMention(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
