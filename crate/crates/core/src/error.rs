use thiserror::Error;

/// Errors raised by the numeric routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("{what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: usize,
        budget: usize,
    },

    #[error("content is not monotone in the exponent: {0}")]
    NonmonotoneContent(String),

    #[error("insufficient grid: need at least {needed} usable scales, got {got}")]
    InsufficientGrid { needed: usize, got: usize },

    #[error("support of p is not contained in support of q (index {0})")]
    SupportViolation(usize),

    #[error("markers at the same position {0}")]
    DegenerateMarkers(String),

    #[error("no marker within horizon {horizon} of point {point}")]
    NoMarker { point: usize, horizon: i64 },

    #[error("window is not certified: {0}")]
    UncertifiedWindow(String),

    #[error("iteration did not converge: {0}")]
    Nonconvergence(String),

    #[error("linear program is {0}")]
    Lp(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
