use std::path::PathBuf;

/// Everything that can go wrong in the solver, the diagnostics and the
/// experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root finder did not reach |residual| <= {tol:e} after {iterations} iterations; bracket [{lo}, {hi}]")]
    Convergence {
        tol: f64,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("front detection failed in row {row} (y = {y}): {reason}")]
    FrontDetection { row: usize, y: f64, reason: String },

    /// Expected terminal outcome of a run approaching breakdown; carries the
    /// first offending cell.
    #[error("blow-up suspected at t = {t}: cell ({i}, {j}) at (x, y) = ({x}, {y}): {reason}")]
    BlowUpSuspected {
        t: f64,
        i: usize,
        j: usize,
        x: f64,
        y: f64,
        reason: String,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("time grid is not uniform: {0}")]
    NonUniformTimeGrid(String),

    #[error(
        "censored sample (epsilon = {epsilon}) present; exclude censored entries before fitting"
    )]
    CensoredSample { epsilon: f64 },

    #[error("sweep driver failed for epsilon = {epsilon}: {source}")]
    Driver {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at line {line} (key `{key}`): {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("malformed field dump {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
