use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Pauli index {0} out of range (expected 1..=3)")]
    PauliIndex(usize),

    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: n={left_n}, L={left_l} vs n={right_n}, L={right_l}")]
    GridMismatch {
        left_n: usize,
        left_l: f64,
        right_n: usize,
        right_l: f64,
    },

    #[error("field is in {found} representation, expected {expected}")]
    ReprMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fiber is degenerate: the E+ component of the input vanishes")]
    DegenerateFiber,

    #[error("fiber maximization did not converge in {iterations} iterations (dt={dt:.3e}, r_minus={r_minus:.3e})")]
    MaxIterations {
        iterations: usize,
        dt: f64,
        r_minus: f64,
        best: Box<crate::nehari::FiberSolution>,
    },

    #[error("fiber is unbounded above along t (no sign change below t = {0})")]
    UnboundedFiber(f64),

    #[error("fiber multi-start disagreement {spread:.3e} exceeds {tol:.3e}")]
    FiberNotUnique { spread: f64, tol: f64 },

    #[error("model rejected: {0}")]
    ModelRejected(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("malformed config at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("malformed field file {path}: {msg}")]
    FieldFormat { path: PathBuf, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
