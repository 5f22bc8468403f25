use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("extxyz parse error in frame {frame} (line {line}): {message}")]
    Parse {
        frame: usize,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing labels: {0}")]
    MissingLabels(String),

    #[error("atoms {i} and {j} coincide")]
    SingularGeometry { i: usize, j: usize },

    #[error("non-finite value in {context}{}", atom.map(|a| format!(" at atom {a}")).unwrap_or_default())]
    Numeric {
        context: &'static str,
        atom: Option<usize>,
    },

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, also used for CLI exit codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidInput(_) => "invalid_input",
            Error::MissingLabels(_) => "missing_labels",
            Error::SingularGeometry { .. } => "singular_geometry",
            Error::Numeric { .. } => "numeric",
            Error::Divergence { .. } => "divergence",
            Error::DegenerateDirection(_) => "degenerate_direction",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::Config(_) => "config",
            Error::File { .. } | Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Process exit code: 2 config, 3 numeric failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) | Error::ShapeMismatch(_) => 2,
            Error::Numeric { .. }
            | Error::Divergence { .. }
            | Error::SingularGeometry { .. }
            | Error::DegenerateDirection(_) => 3,
            Error::Parse { .. }
            | Error::MissingLabels(_)
            | Error::File { .. }
            | Error::Io(_)
            | Error::Json(_) => 4,
        }
    }
}
