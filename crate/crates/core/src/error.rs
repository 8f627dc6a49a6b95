use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no vertical resolution")]
    NoVerticalResolution,

    #[error("{op} requires zero-mean input")]
    NonZeroMean { op: &'static str },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver diverged (CFL?) in the step ending at t = {t}")]
    Diverged { t: f64 },

    #[error("slow-variable grids incommensurate: {0}")]
    Incommensurate(String),

    #[error("time {t} is not a stored sample of the trajectory")]
    NotSampled { t: f64 },

    #[error("A_δ undefined (division by zero)")]
    ADeltaUndefined,

    #[error("undefined ratio: {0}")]
    ZeroData(String),

    #[error("{stage} failed at t = {t}: {source}")]
    AtTime {
        stage: &'static str,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("config hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the root cause is numerical divergence.
    pub fn is_divergence(&self) -> bool {
        match self {
            Error::Diverged { .. } => true,
            Error::AtTime { source, .. } => source.is_divergence(),
            _ => false,
        }
    }

    pub(crate) fn at(self, stage: &'static str, t: f64) -> Error {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                stage,
                t,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
