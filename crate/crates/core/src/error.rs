use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An index or interval falls outside the valid range.
    #[error("range error: {0}")]
    Range(String),

    /// A parameter violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Shapes, labels or trial structures of two inputs disagree.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// Numerically degenerate input (rank deficiency, zero rows, singular matrices).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no trigger events: {0}")]
    NoEvents(String),

    #[error("trial structure error: {0}")]
    Structure(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("unsupported file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    /// An error raised inside a named pipeline stage.
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
}

impl Error {
    /// The innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Tags errors with the pipeline stage that produced them.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: Into<Error>> StageContext<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e.into()),
        })
    }
}
