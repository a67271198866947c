use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("invalid fair prices: {0}")]
    InvalidPrices(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("outcome {outcome} is outside 1..={outcomes}")]
    UnknownOutcome { outcome: usize, outcomes: usize },

    #[error("swap input and output must differ (both {0})")]
    SameToken(usize),

    #[error("amount must be non-negative, got {0}")]
    NegativeAmount(String),

    #[error("amount must be positive, got {0}")]
    NonPositiveAmount(String),

    #[error("account `{account}` holds {available} collateral, needs {needed}")]
    InsufficientCollateral {
        account: String,
        needed: String,
        available: String,
    },

    #[error("account `{account}` holds {available} of outcome {outcome}, needs {needed}")]
    InsufficientTokens {
        account: String,
        outcome: usize,
        needed: String,
        available: String,
    },

    #[error("account `{account}` holds {available} LP shares, needs {needed}")]
    InsufficientShares {
        account: String,
        needed: String,
        available: String,
    },

    #[error("market is not open")]
    MarketNotOpen,

    #[error("betting period has not been closed")]
    BettingOpen,

    #[error("market already resolved")]
    AlreadyResolved,

    #[error("market not resolved")]
    NotResolved,

    #[error("caller `{0}` is not the market oracle")]
    UnauthorizedOracle(String),

    #[error("pool cannot fill: outcome {outcome} would need {needed}, pool holds {available}")]
    Unfillable {
        outcome: usize,
        needed: String,
        available: String,
    },

    #[error("pool has zero total value")]
    EmptyPool,

    #[error("metric needs at least one market")]
    EmptyInput,

    #[error("market has no sampled winner")]
    MissingWinner,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
