//! The interface shared by the fair-price anchored pool and the
//! constant-product baseline, plus the quote types both produce.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fair::FairPrices;
use crate::scalar::Scalar;
use crate::uamm::SwapBranch;

/// Wager size used to probe the marginal (spot) price.
pub const SPOT_PROBE_WAGER: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Uamm,
    Cpmm,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Uamm => "uamm",
            EngineKind::Cpmm => "cpmm",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uamm" => Ok(EngineKind::Uamm),
            "cpmm" => Ok(EngineKind::Cpmm),
            other => Err(Error::Parse(format!("unknown engine `{other}` (uamm|cpmm)"))),
        }
    }
}

/// What a buy did to the pool, returned by [`Engine::execute_buy`].
#[derive(Debug, Clone, PartialEq)]
pub struct BuyFill<T> {
    pub outcome: usize,
    pub wager: T,
    /// Outcome tokens paid to the bettor, including the `wager` kept from the mint.
    pub odd: T,
    pub fee: T,
    /// LP shares minted to the treasury.
    pub shares_minted: T,
    /// Collateral that the combine step minted into outcome sets.
    pub combined: T,
    /// Sets merged back into collateral after the swaps.
    pub merged: T,
    /// Curve branch of each inner swap, in loop order.
    pub branches: Vec<SwapBranch>,
}

impl<T: Scalar> BuyFill<T> {
    pub fn empty(outcome: usize) -> Self {
        BuyFill {
            outcome,
            wager: T::zero(),
            odd: T::zero(),
            fee: T::zero(),
            shares_minted: T::zero(),
            combined: T::zero(),
            merged: T::zero(),
            branches: Vec::new(),
        }
    }

    /// Net change of the locked collateral behind outcome sets.
    pub fn locked_delta(&self) -> T {
        self.wager + self.combined - self.merged
    }
}

/// A priced but unexecuted bet.
#[derive(Debug, Clone, PartialEq)]
pub struct Quote<T> {
    pub engine: EngineKind,
    pub outcome: usize,
    pub wager: T,
    pub odd: T,
    pub fee: T,
    /// `wager / odd`; equals the fair price for a zero wager.
    pub implied_price: f64,
    /// `implied_price - fair price`.
    pub slippage: f64,
    pub shares_minted: T,
    /// Reserve vector after the trade, collateral first.
    pub post_reserves: Vec<T>,
}

impl<T: Scalar> Quote<T> {
    pub fn from_fill(engine: EngineKind, fill: &BuyFill<T>, fair_price: T, post: Vec<T>) -> Self {
        let fair = fair_price.as_f64();
        let implied_price = if fill.odd.is_zero() {
            fair
        } else {
            fill.wager.as_f64() / fill.odd.as_f64()
        };
        Quote {
            engine,
            outcome: fill.outcome,
            wager: fill.wager,
            odd: fill.odd,
            fee: fill.fee,
            implied_price,
            slippage: implied_price - fair,
            shares_minted: fill.shares_minted,
            post_reserves: post,
        }
    }

    /// Payout per unit staked.
    pub fn decimal_odds(&self) -> f64 {
        if self.wager.is_zero() {
            0.0
        } else {
            self.odd.as_f64() / self.wager.as_f64()
        }
    }
}

/// A market maker that prices bets through the mint / swap / merge pipeline.
///
/// Reserve vectors are laid out collateral first, then outcomes `1..=K`.
pub trait Engine<T: Scalar>: Clone + Send + Sync {
    fn kind(&self) -> EngineKind;

    fn reserves(&self) -> &[T];

    fn fee_accrued(&self) -> T;

    /// Runs the buy pipeline against live state. Atomic: on error nothing changes.
    fn execute_buy(&mut self, fair: &FairPrices<T>, outcome: usize, wager: T, fee_rate: T) -> Result<BuyFill<T>>;

    /// Marginal implied probability of `outcome`, evaluated in `f64`.
    fn spot_price(&self, fair: &FairPrices<T>, outcome: usize) -> Result<f64>;

    /// Converts the pool's winning tokens to collateral and burns the rest.
    /// Returns the number of winning tokens redeemed.
    fn redeem_winner(&mut self, winner: usize) -> T;

    /// Canonical `key=value` pairs describing the pool.
    fn snapshot_entries(&self) -> Vec<(String, String)>;

    fn outcomes(&self) -> usize {
        self.reserves().len() - 1
    }

    fn collateral(&self) -> T {
        self.reserves()[0]
    }

    /// Pure pricing: runs the pipeline on a scratch copy.
    fn quote(&self, fair: &FairPrices<T>, outcome: usize, wager: T, fee_rate: T) -> Result<Quote<T>> {
        let mut scratch = self.clone();
        let fill = scratch.execute_buy(fair, outcome, wager, fee_rate)?;
        Ok(Quote::from_fill(
            self.kind(),
            &fill,
            fair.get(outcome),
            scratch.reserves().to_vec(),
        ))
    }

    /// Per-outcome balance with the collateral pool folded in, `R0 + Rk`.
    fn effective_balances(&self) -> Vec<T> {
        let r = self.reserves();
        r[1..].iter().map(|&rk| r[0] + rk).collect()
    }

    /// `R0 + sum_k f_k * R_k`.
    fn total_value(&self, fair: &FairPrices<T>) -> T {
        let r = self.reserves();
        r[1..]
            .iter()
            .zip(fair.as_slice())
            .fold(r[0], |acc, (&rk, &fk)| acc + fk * rk)
    }
}
