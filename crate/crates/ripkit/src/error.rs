use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Malformed or out-of-contract input (dimensions, non-finite entries,
    /// parameter ranges).
    InvalidInput(String),
    /// Cholesky failed: the matrix is not positive definite.
    NotPositiveDefinite,
    /// The division precondition `sum(head) + slack >= sum(tail)` fails.
    InfeasibleDivision(String),
    /// An enumeration would exceed the configured budget.
    BudgetExceeded {
        required: u128,
        budget: u64,
    },
    /// A vector offered as a null-space witness fails its preconditions.
    InvalidWitness(String),
    /// A bound was requested outside its regime (e.g. delta >= 1/3).
    OutOfRegime(String),
    /// The constraint set of a recovery program is empty.
    Infeasible(String),
    Io(std::io::Error),
    Json(serde_json::Error),
    /// Malformed on-disk data (CSV parse failures, sidecar mismatches).
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::InfeasibleDivision(msg) => write!(f, "infeasible division: {msg}"),
            Error::BudgetExceeded { required, budget } => {
                write!(f, "enumeration budget exceeded: {required} > {budget}")
            }
            Error::InvalidWitness(msg) => write!(f, "invalid witness: {msg}"),
            Error::OutOfRegime(msg) => write!(f, "out of regime: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible program: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
