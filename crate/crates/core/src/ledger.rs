//! Collateral-backed conditional-token ledger.
//!
//! A [`Market`] owns every balance of one betting market: account holdings of
//! collateral and outcome tokens, the locked collateral `L` backing minted
//! sets, and the market maker's pool. While the market is unresolved, every
//! outcome token satisfies `sum(account holdings) + pool reserve == L` exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::amount::Amount;
use crate::baseline::CpmmPool;
use crate::engine::{BuyFill, Engine, Quote};
use crate::error::{Error, Result};
use crate::fair::FairPrices;
use crate::uamm::PoolState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TokenId {
    Collateral,
    /// 1-based outcome index.
    Outcome(usize),
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenId::Collateral => f.write_str("collateral"),
            TokenId::Outcome(k) => write!(f, "outcome.{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketSpec {
    pub market_id: String,
    pub outcomes: usize,
    pub fee_rate: Amount,
    pub oracle_id: String,
}

impl MarketSpec {
    pub const DEFAULT_FEE_RATE: Amount = Amount::from_micros(25_000);

    pub fn new(market_id: impl Into<String>, outcomes: usize, oracle_id: impl Into<String>) -> Self {
        MarketSpec {
            market_id: market_id.into(),
            outcomes,
            fee_rate: Self::DEFAULT_FEE_RATE,
            oracle_id: oracle_id.into(),
        }
    }

    pub fn with_fee_rate(mut self, fee_rate: Amount) -> Self {
        self.fee_rate = fee_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.outcomes < 2 {
            return Err(Error::InvalidMarket(format!(
                "need at least 2 outcomes, got {}",
                self.outcomes
            )));
        }
        if self.fee_rate.is_negative() || self.fee_rate >= Amount::ONE {
            return Err(Error::InvalidMarket(format!(
                "fee rate {} outside [0, 1)",
                self.fee_rate
            )));
        }
        if !valid_id(&self.market_id) || !valid_id(&self.oracle_id) {
            return Err(Error::InvalidMarket(
                "ids must be non-empty without `=` or whitespace".into(),
            ));
        }
        Ok(())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains('=') && !id.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Open,
    /// Betting period over, awaiting the oracle.
    Closed,
    Resolved {
        winner: usize,
    },
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Open => f.write_str("open"),
            Phase::Closed => f.write_str("closed"),
            Phase::Resolved { winner } => write!(f, "resolved:{winner}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Holdings {
    pub collateral: Amount,
    /// Outcome token balances, index `k - 1` for outcome `k`.
    pub outcomes: Vec<Amount>,
}

impl Holdings {
    fn new(k: usize) -> Self {
        Holdings {
            collateral: Amount::ZERO,
            outcomes: vec![Amount::ZERO; k],
        }
    }

    pub fn outcome(&self, k: usize) -> Amount {
        self.outcomes[k - 1]
    }
}

/// An executed bet.
#[derive(Debug, Clone, PartialEq)]
pub struct BetRecord {
    pub account: String,
    pub outcome: usize,
    pub wager: Amount,
    pub odd: Amount,
    pub fee: Amount,
    pub shares_minted: Amount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market<E> {
    spec: MarketSpec,
    phase: Phase,
    fair: FairPrices<Amount>,
    locked: Amount,
    deposited: Amount,
    accounts: BTreeMap<String, Holdings>,
    pool: E,
    bets: Vec<BetRecord>,
}

pub type UammMarket = Market<PoolState<Amount>>;
pub type CpmmMarket = Market<CpmmPool<Amount>>;

impl UammMarket {
    /// An open market with an empty fair-price anchored pool.
    pub fn new(spec: MarketSpec, fair: FairPrices<Amount>) -> Result<Self> {
        let pool = PoolState::new(spec.outcomes);
        Market::with_pool(spec, fair, pool)
    }

    /// Moves collateral from `account` into the collateral pool for LP shares.
    pub fn add_liquidity(&mut self, account: &str, amount: Amount) -> Result<Amount> {
        self.require_open()?;
        self.debit_collateral(account, amount)?;
        match self.pool.add_liquidity(account, amount, &self.fair) {
            Ok(shares) => Ok(shares),
            Err(e) => {
                self.holdings_mut(account).collateral += amount;
                Err(e)
            }
        }
    }

    /// Burns LP shares for collateral. Allowed in any phase.
    pub fn remove_liquidity(&mut self, account: &str, shares: Amount) -> Result<Amount> {
        let payout = self.pool.remove_liquidity(account, shares)?;
        self.holdings_mut(account).collateral += payout;
        Ok(payout)
    }

    pub fn lp_shares(&self, account: &str) -> Amount {
        self.pool.shares_of(account)
    }
}

impl CpmmMarket {
    /// An open market whose constant-product pool is funded with `funding`
    /// of external collateral on behalf of `funder`, so that initial marginal
    /// prices equal `fair`. Outcome tokens minted beyond the pool reserves are
    /// credited to the funder.
    pub fn seeded(spec: MarketSpec, fair: FairPrices<Amount>, funder: &str, funding: Amount) -> Result<Self> {
        let seed = CpmmPool::seeded(funding, &fair)?;
        let mut market = Market::with_pool(spec, fair, seed.pool)?;
        market.deposited += seed.minted;
        market.locked += seed.minted;
        let holdings = market.holdings_mut(funder);
        for (slot, refund) in holdings.outcomes.iter_mut().zip(&seed.refund) {
            *slot += *refund;
        }
        debug_assert!(market.check_invariants().is_ok());
        Ok(market)
    }
}

impl<E: Engine<Amount>> Market<E> {
    fn with_pool(spec: MarketSpec, fair: FairPrices<Amount>, pool: E) -> Result<Self> {
        spec.validate()?;
        if fair.outcomes() != spec.outcomes || pool.outcomes() != spec.outcomes {
            return Err(Error::InvalidMarket(format!(
                "market has {} outcomes, prices {}, pool {}",
                spec.outcomes,
                fair.outcomes(),
                pool.outcomes()
            )));
        }
        Ok(Market {
            spec,
            phase: Phase::Open,
            fair,
            locked: Amount::ZERO,
            deposited: Amount::ZERO,
            accounts: BTreeMap::new(),
            pool,
            bets: Vec::new(),
        })
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn fair(&self) -> &FairPrices<Amount> {
        &self.fair
    }

    pub fn pool(&self) -> &E {
        &self.pool
    }

    /// Locked collateral `L` backing outstanding outcome-token sets.
    pub fn locked(&self) -> Amount {
        self.locked
    }

    pub fn bets(&self) -> &[BetRecord] {
        &self.bets
    }

    pub fn holdings(&self, account: &str) -> Holdings {
        self.accounts
            .get(account)
            .cloned()
            .unwrap_or_else(|| Holdings::new(self.spec.outcomes))
    }

    pub fn balance(&self, account: &str, token: TokenId) -> Amount {
        let h = self.holdings(account);
        match token {
            TokenId::Collateral => h.collateral,
            TokenId::Outcome(k) => h.outcome(k),
        }
    }

    /// Replaces the fair-price reference used by the pool.
    pub fn set_fair_prices(&mut self, fair: FairPrices<Amount>) -> Result<()> {
        if fair.outcomes() != self.spec.outcomes {
            return Err(Error::InvalidPrices("outcome count mismatch".into()));
        }
        self.fair = fair;
        Ok(())
    }

    /// Credits external collateral to an account.
    pub fn deposit(&mut self, account: &str, amount: Amount) -> Result<()> {
        if amount.is_negative() {
            return Err(Error::NegativeAmount(amount.to_string()));
        }
        self.holdings_mut(account).collateral += amount;
        self.deposited += amount;
        Ok(())
    }

    /// Locks `amount` collateral and credits `amount` of every outcome token.
    pub fn mint(&mut self, account: &str, amount: Amount) -> Result<()> {
        self.require_open()?;
        self.debit_collateral(account, amount)?;
        let h = self.holdings_mut(account);
        for t in &mut h.outcomes {
            *t += amount;
        }
        self.locked += amount;
        Ok(())
    }

    /// Burns `amount` of every outcome token for `amount` collateral.
    pub fn merge(&mut self, account: &str, amount: Amount) -> Result<()> {
        if amount.is_negative() {
            return Err(Error::NegativeAmount(amount.to_string()));
        }
        if self.phase == Phase::Closed {
            return Err(Error::MarketNotOpen);
        }
        let h = self.holdings(account);
        if let Some((idx, have)) = h.outcomes.iter().enumerate().find(|(_, t)| **t < amount) {
            return Err(Error::InsufficientTokens {
                account: account.to_string(),
                outcome: idx + 1,
                needed: amount.to_string(),
                available: have.to_string(),
            });
        }
        let h = self.holdings_mut(account);
        for t in &mut h.outcomes {
            *t -= amount;
        }
        h.collateral += amount;
        self.locked -= amount;
        Ok(())
    }

    pub fn close_betting(&mut self) -> Result<()> {
        self.require_open()?;
        self.phase = Phase::Closed;
        Ok(())
    }

    /// Oracle report. Only the market's oracle may call it, once, after
    /// betting has closed.
    pub fn resolve(&mut self, caller: &str, winner: usize) -> Result<()> {
        match self.phase {
            Phase::Resolved { .. } => return Err(Error::AlreadyResolved),
            Phase::Open => return Err(Error::BettingOpen),
            Phase::Closed => {}
        }
        if caller != self.spec.oracle_id {
            return Err(Error::UnauthorizedOracle(caller.to_string()));
        }
        self.fair.check_outcome(winner)?;
        self.phase = Phase::Resolved { winner };
        Ok(())
    }

    /// Pays one collateral per winning token held and burns every outcome
    /// token of the account.
    pub fn redeem(&mut self, account: &str) -> Result<Amount> {
        let winner = self.winner()?;
        let h = self.holdings_mut(account);
        let payout = h.outcome(winner);
        for t in &mut h.outcomes {
            *t = Amount::ZERO;
        }
        h.collateral += payout;
        self.locked -= payout;
        Ok(payout)
    }

    /// Redeems the pool's winning tokens into its collateral pool.
    pub fn redeem_pool(&mut self) -> Result<Amount> {
        let winner = self.winner()?;
        let won = self.pool.redeem_winner(winner);
        self.locked -= won;
        Ok(won)
    }

    pub fn winner(&self) -> Result<usize> {
        match self.phase {
            Phase::Resolved { winner } => Ok(winner),
            _ => Err(Error::NotResolved),
        }
    }

    /// Prices a bet without touching state.
    pub fn quote(&self, outcome: usize, wager: Amount) -> Result<Quote<Amount>> {
        self.require_open()?;
        self.pool.quote(&self.fair, outcome, wager, self.spec.fee_rate)
    }

    /// Executes a bet: the account pays `wager` plus the fee and receives the
    /// quoted number of outcome tokens.
    pub fn buy(&mut self, account: &str, outcome: usize, wager: Amount) -> Result<BetRecord> {
        self.require_open()?;
        self.fair.check_outcome(outcome)?;
        if wager.is_negative() {
            return Err(Error::NegativeAmount(wager.to_string()));
        }
        let fee = wager * self.spec.fee_rate;
        let cost = wager + fee;
        let available = self.holdings(account).collateral;
        if available < cost {
            return Err(Error::InsufficientCollateral {
                account: account.to_string(),
                needed: cost.to_string(),
                available: available.to_string(),
            });
        }
        let fill: BuyFill<Amount> = self.pool.execute_buy(&self.fair, outcome, wager, self.spec.fee_rate)?;
        debug_assert_eq!(fill.fee, fee);
        let h = self.holdings_mut(account);
        h.collateral -= cost;
        h.outcomes[outcome - 1] += fill.odd;
        self.locked += fill.locked_delta();
        let record = BetRecord {
            account: account.to_string(),
            outcome,
            wager,
            odd: fill.odd,
            fee: fill.fee,
            shares_minted: fill.shares_minted,
        };
        if !wager.is_zero() {
            self.bets.push(record.clone());
        }
        debug_assert!(self.check_invariants().is_ok(), "{:?}", self.check_invariants());
        Ok(record)
    }

    /// Exact conservation checks.
    ///
    /// * per outcome token (only the winner once resolved): holdings + pool == L
    /// * collateral: accounts + collateral pool + fees + L == deposits
    /// * no negative balances
    pub fn check_invariants(&self) -> Result<()> {
        let reserves = self.pool.reserves();
        if reserves.iter().any(|r| r.is_negative()) {
            return Err(Error::Invariant(format!("negative pool reserve {reserves:?}")));
        }
        let live: Vec<usize> = match self.phase {
            Phase::Resolved { winner } => vec![winner],
            _ => (1..=self.spec.outcomes).collect(),
        };
        for k in live {
            let held: Amount = self.accounts.values().map(|h| h.outcome(k)).sum();
            if held + reserves[k] != self.locked {
                return Err(Error::Invariant(format!(
                    "outcome {k}: holdings {held} + pool {} != locked {}",
                    reserves[k], self.locked
                )));
            }
        }
        let mut collateral = Amount::ZERO;
        for (id, h) in &self.accounts {
            if h.collateral.is_negative() || h.outcomes.iter().any(|t| t.is_negative()) {
                return Err(Error::Invariant(format!("negative balance for `{id}`")));
            }
            collateral += h.collateral;
        }
        let total = collateral + reserves[0] + self.pool.fee_accrued() + self.locked;
        if total != self.deposited {
            return Err(Error::Invariant(format!(
                "collateral {total} != deposited {}",
                self.deposited
            )));
        }
        Ok(())
    }

    /// Canonical `key=value` text, one entry per line, keys sorted.
    pub fn snapshot(&self) -> String {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        entries.insert("market.id".into(), self.spec.market_id.clone());
        entries.insert("market.oracle".into(), self.spec.oracle_id.clone());
        entries.insert("market.outcomes".into(), self.spec.outcomes.to_string());
        entries.insert("market.fee_rate".into(), self.spec.fee_rate.to_string());
        entries.insert("market.phase".into(), self.phase.to_string());
        entries.insert("market.locked".into(), self.locked.to_string());
        entries.insert("market.deposited".into(), self.deposited.to_string());
        for (k, f) in self.fair.as_slice().iter().enumerate() {
            entries.insert(format!("market.fair.{}", k + 1), f.to_string());
        }
        for (id, h) in &self.accounts {
            entries.insert(format!("account.{id}.collateral"), h.collateral.to_string());
            for (k, t) in h.outcomes.iter().enumerate() {
                entries.insert(format!("account.{id}.outcome.{}", k + 1), t.to_string());
            }
        }
        entries.extend(self.pool.snapshot_entries());
        let mut out = String::new();
        for (k, v) in entries {
            out.push_str(&k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    fn require_open(&self) -> Result<()> {
        if self.phase == Phase::Open {
            Ok(())
        } else {
            Err(Error::MarketNotOpen)
        }
    }

    fn holdings_mut(&mut self, account: &str) -> &mut Holdings {
        let k = self.spec.outcomes;
        self.accounts
            .entry(account.to_string())
            .or_insert_with(|| Holdings::new(k))
    }

    fn debit_collateral(&mut self, account: &str, amount: Amount) -> Result<()> {
        if amount.is_negative() {
            return Err(Error::NegativeAmount(amount.to_string()));
        }
        let available = self.holdings(account).collateral;
        if available < amount {
            return Err(Error::InsufficientCollateral {
                account: account.to_string(),
                needed: amount.to_string(),
                available: available.to_string(),
            });
        }
        self.holdings_mut(account).collateral -= amount;
        Ok(())
    }
}
