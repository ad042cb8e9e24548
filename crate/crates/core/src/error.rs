//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlendError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: {msg}")]
    Manifest {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("image decode ({path}): {msg}")]
    Decode { path: String, msg: String },

    #[error("invalid image data: {0}")]
    InvalidCanvas(String),

    #[error("channel has no valid pixels")]
    EmptyMask,

    #[error("inputs do not overlap")]
    NoOverlap,

    #[error("seam outside overlap: {0}")]
    SeamOutsideOverlap(String),

    #[error("positivity violated; apply offset")]
    PositivityViolated,

    #[error("nonzero drift on a boundary face at {0}")]
    DriftOnBoundary(String),

    #[error("alpha window exceeds overlap at row {row}")]
    AlphaWindow { row: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear solver failed at outer step {step}: relative residual {residual:e} after {iterations} iterations")]
    Solver {
        step: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("{0}")]
    Pipeline(String),
}

pub type Result<T> = std::result::Result<T, BlendError>;

impl BlendError {
    /// Process exit code the CLI maps this error to: solver failures are 2,
    /// everything else is an input error (1).
    pub fn exit_code(&self) -> i32 {
        match self {
            BlendError::Solver { .. } => 2,
            _ => 1,
        }
    }
}
