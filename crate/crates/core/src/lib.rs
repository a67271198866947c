//! Conditional-token betting markets priced by a fair-price anchored AMM.
//!
//! * [`ledger`]: collateral, outcome tokens, mint / merge / resolve / redeem
//! * [`uamm`]: the piecewise swap curve, pool state, LP shares and buy pipeline
//! * [`baseline`]: constant-product comparator behind the same [`Engine`] trait
//! * [`sim`] and [`metrics`]: seeded market simulations and their PnL metrics
//! * [`report`] and [`probe`]: CSV output and numeric property probes
//!
//! Pricing code is generic over [`Scalar`]; ledgers run on the exact
//! fixed-point [`Amount`], statistics on `f64`.

pub mod amount;
pub mod baseline;
pub mod engine;
pub mod error;
pub mod fair;
pub mod ledger;
pub mod metrics;
pub mod probe;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod uamm;

pub use amount::Amount;
pub use engine::{BuyFill, Engine, EngineKind, Quote};
pub use error::{Error, Result};
pub use fair::FairPrices;
pub use scalar::Scalar;

/// Fair prices in floating point.
pub type FairPriceVector = FairPrices<f64>;
/// Fixed-point fair prices used by ledgers.
pub type LedgerPrices = FairPrices<Amount>;
/// Pool state for statistics and property checks.
pub type FloatPool = uamm::PoolState<f64>;
/// Pool state carried by ledgers.
pub type LedgerPool = uamm::PoolState<Amount>;
