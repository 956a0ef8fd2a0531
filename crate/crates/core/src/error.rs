use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported/corrupt TIFF: {0}")]
    Tiff(String),

    #[error("image decode/encode error: {0}")]
    Image(String),

    #[error("non-finite temperature at pixel {index} (x={x}, y={y})")]
    NonFinite { index: usize, x: usize, y: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("degenerate histogram: {0}")]
    DegenerateHistogram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("network error: {0}")]
    Network(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("illegal decision transition for {id}: {from} -> {to}")]
    IllegalTransition { id: String, from: String, to: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Whether this error stems from I/O or an external service rather than
    /// from invalid input.
    pub fn is_io_or_protocol(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Tiff(_)
                | Error::Image(_)
                | Error::Protocol(_)
                | Error::Network(_)
                | Error::Json(_)
        )
    }
}
