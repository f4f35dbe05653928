use std::path::PathBuf;

use crate::equations::Trajectory;

/// Errors raised by the spectral calculus, integrator, persistence and
/// command-line layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid size {0}: need a power of two >= 8")]
    InvalidGrid(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid mismatch: {left} modes vs {right} modes")]
    GridMismatch { left: usize, right: usize },

    #[error("coefficients violate conjugate symmetry (relative defect {defect:.3e})")]
    NotReal { defect: f64 },

    #[error("field has non-zero mean {mean:.3e} (tolerance {tolerance:.3e})")]
    NonZeroMean { mean: f64, tolerance: f64 },

    #[error("blow-up at t = {time}: max |u| = {max_abs:.3e} exceeds {threshold:.3e}")]
    BlowUp {
        time: f64,
        max_abs: f64,
        threshold: f64,
        partial: Box<Trajectory>,
    },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("too few snapshots: need {needed}, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bad trajectory file: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
