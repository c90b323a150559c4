use thiserror::Error;

/// Errors raised by the solver and its harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A function was evaluated outside its domain (e.g. a nonpositive size).
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor received an out-of-range parameter.
    #[error("invalid parameter `{name}` = {value}: expected {allowed}")]
    Parameter {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("invalid probe set: {0}")]
    Probe(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("states live on different grids")]
    GridMismatch,

    /// A step produced a component more negative than roundoff allows.
    #[error("stability violation at t = {t}: cell {cell} reached {value:e} (max density {max:e})")]
    Stability { t: f64, cell: usize, value: f64, max: f64 },

    #[error("no snapshot at t = {0}")]
    TimeLookup(f64),

    #[error("decay fit needs at least 5 positive samples in the window, found {0}")]
    DecayWindow(usize),

    #[error("hypothesis {id} violated: {detail}")]
    Hypothesis { id: String, detail: String },

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config validation failed:\n{}", .0.join("\n"))]
    ConfigInvalid(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_param(name: &'static str, value: f64, ok: bool, allowed: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter { name, value, allowed })
    }
}
