use thiserror::Error;

use crate::lp::LpError;
use crate::model::ValidationReport;

/// Failure modes of the market-level operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid market: {0}")]
    InvalidMarket(ValidationReport),
    /// Input that could not be read as a market or claim file.
    #[error("malformed input: {0}")]
    Parse(ValidationReport),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The super-hedging problem is unbounded below or the market fails
    /// robust no-arbitrage; never reported as a price.
    #[error("market admits robust arbitrage: {blocking}")]
    RobustArbitrage {
        blocking: String,
        /// Improving direction of the hedging LP when it is unbounded below.
        ray: Option<crate::model::Strategy>,
    },
    #[error("no quote-consistent martingale measure exists: {0}")]
    NoConsistentMeasure(String),
    /// A certificate failed to replay or a proven identity did not hold.
    #[error("internal soundness failure: {0}")]
    Soundness(String),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
}

impl From<LpError> for Error {
    fn from(e: LpError) -> Self {
        Error::Dimension(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
