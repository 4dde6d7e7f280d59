use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("backgrounds depleted: every corpus entry has already been used")]
    BackgroundsDepleted,

    #[error("no valid distractor type: catalog has {0} object type(s), need at least 2")]
    NoDistractorType(usize),

    #[error("insufficient backgrounds: need {needed}, corpus has {available}")]
    InsufficientBackgrounds { needed: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing background frame {0}")]
    MissingBackgroundFrame(PathBuf),

    #[error("sequence {sequence}: expected {expected} frames, found {found}")]
    FrameCountMismatch {
        sequence: String,
        expected: usize,
        found: usize,
    },

    #[error("tracker {tracker} has no result for sequence {sequence}")]
    MissingSequence { tracker: String, sequence: String },

    #[error("incomplete coverage, missing (tracker, sequence) pairs: {0:?}")]
    IncompleteCoverage(Vec<(String, String)>),

    #[error("unknown attribute tag {tag:?} on sequence {sequence}")]
    UnknownTag { sequence: String, tag: String },

    #[error("no scored frames")]
    NoScoredFrames,

    #[error("unknown catalog instance {0:?}")]
    UnknownInstance(String),

    #[error("unknown background {0:?}")]
    UnknownBackground(String),

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

/// Reads and deserializes a JSON document.
pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Serializes to pretty JSON with a trailing newline and writes it.
pub(crate) fn write_json<T: serde::Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
