use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller-supplied parameters violate a precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// The requested computation exceeds an enumeration or memory budget.
    #[error("budget exceeded: {what} needs ~{needed} units, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: f64,
        limit: f64,
    },

    /// A floating-point path could not certify its result.
    #[error("precision failure in {what}: {detail}")]
    Precision { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
