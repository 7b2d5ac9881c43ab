use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage an error surfaced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Transform,
    Selection,
    Classifier,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Transform => "transform",
            Stage::Selection => "selection",
            Stage::Classifier => "classifier",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("format error at row {row}: {msg}")]
    Format { row: usize, msg: String },
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("stratification error: {0}")]
    Stratification(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("series too short: effective length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("incompatible model file: format version {found}, this build reads version {expected}")]
    Version { found: u32, expected: u32 },
    #[error("model file integrity check failed: {0}")]
    Integrity(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error, with stage and context wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } | Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
