//! Crate-wide error type and the exit-code policy for the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A register or phase-readout request exceeds what the dense simulator
    /// can hold.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Dimensions of two values that must agree do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A state, matrix or estimate violates a structural requirement
    /// (non-unit norm, non-unitary entries, and similar).
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// An all-zero window or kernel has no amplitude encoding.
    #[error("degenerate patch: {0}")]
    DegeneratePatch(String),

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    /// Bad command-line input or an unusable parameter combination.
    #[error("invalid input: {0}")]
    Input(String),

    /// A file that was located but does not parse as CSV or PGM.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: capacity failures are 2, every other failure is 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
