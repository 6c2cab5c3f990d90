use thiserror::Error;

/// Errors raised by field construction, evolution and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {n}: {reason}")]
    InvalidGrid { n: usize, reason: &'static str },

    #[error("non-finite sample at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("initial data: {0}")]
    InitialData(String),

    #[error("operation undefined for the zero field")]
    ZeroField,

    #[error("shear frequency {frequency} not representable on an n = {n} grid (requires N <= n/2)")]
    Unresolvable { frequency: u64, n: usize },

    #[error("time {t} outside the truncated schedule horizon [0, {t_star})")]
    OutsideHorizon { t: f64, t_star: f64 },

    #[error("schedule: {0}")]
    Schedule(String),

    #[error("grid/Lagrangian cross-validation failed at t = {t}: max error {max_error:e} > {tolerance:e}")]
    CrossValidation {
        t: f64,
        max_error: f64,
        tolerance: f64,
    },

    #[error("missing diagnostics: {0}")]
    MissingRecords(&'static str),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0}")]
    Setting(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
