//! Crate-wide error type.

use std::path::PathBuf;

/// Errors raised by any stage of the fitting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input configuration is rank-deficient for the requested solver
    /// (coincident points, collinear minimal sets, dominant-plane data).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A model matrix is numerically non-invertible where inversion is required.
    #[error("singular model: {0}")]
    SingularModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point falls outside the image bounds.
    #[error("out of bounds: ({x}, {y}) not inside {width}x{height}")]
    OutOfBounds { x: f64, y: f64, width: usize, height: usize },

    /// No group yields a fittable hypothesis.
    #[error("no hypotheses could be generated: {0}")]
    NoHypotheses(String),

    /// Fewer points remain than a minimal subset requires.
    #[error("insufficient data: need {needed} points, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),

    #[error("failed to parse {path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A module error annotated with the pipeline stage that raised it.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// The underlying error, unwrapping stage attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
