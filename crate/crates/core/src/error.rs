use thiserror::Error;

/// Errors surfaced by the numeric operations.
///
/// Variants map onto the failure classes of the operations: parameter and
/// precondition problems are `Domain`, resolution mismatches between a cover
/// and a scale ladder are `Precision`, regression degeneracies are `Fit`,
/// ladders producing unusable samples (nonpositive excess, underflow) are
/// `Ladder`, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("ladder error: {0}")]
    Ladder(String),
    #[error("not an infinitesimal: {0}")]
    NotInfinitesimal(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("prime table too small: need coverage up to {needed}, table limit is {limit}")]
    TableTooSmall { needed: u64, limit: u64 },
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precision(_) => "precision",
            Error::Fit(_) => "fit",
            Error::Ladder(_) => "ladder",
            Error::NotInfinitesimal(_) => "not-an-infinitesimal",
            Error::Convergence(_) => "convergence",
            Error::TableTooSmall { .. } => "table-too-small",
            Error::Constraint(_) => "constraint",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
