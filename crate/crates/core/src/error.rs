use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured cap of {cap}")]
    DimensionLimit { requested: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Entropy matching hit a boundary of the Gibbs family; `beta` is the
    /// limiting inverse temperature (0 for the maximally mixed state, +inf for
    /// a pure state).
    #[error("entropy-matched Gibbs state is a boundary case (beta -> {beta})")]
    GibbsBoundary { beta: f64 },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
