use std::collections::BTreeMap;

use crate::engine::{BuyFill, Engine, EngineKind, SPOT_PROBE_WAGER};
use crate::error::{Error, Result};
use crate::fair::FairPrices;
use crate::scalar::{relative_error, Scalar};
use crate::uamm::swap::SwapCurve;

/// Liquidity pool state: collateral pool, one pool per outcome token, LP
/// share supply and the target balance the swap curve steers toward.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolState<T> {
    reserves: Vec<T>,
    total_supply: T,
    target_balance: T,
    fee_accrued: T,
    treasury_shares: T,
    lp_shares: BTreeMap<String, T>,
}

impl<T: Scalar> PoolState<T> {
    /// An unfunded pool for `outcomes` outcome tokens.
    pub fn new(outcomes: usize) -> Self {
        assert!(outcomes >= 2, "a market needs at least two outcomes");
        PoolState {
            reserves: vec![T::zero(); outcomes + 1],
            total_supply: T::zero(),
            target_balance: T::zero(),
            fee_accrued: T::zero(),
            treasury_shares: T::zero(),
            lp_shares: BTreeMap::new(),
        }
    }

    /// Builds a pool from raw parts; used by property suites to start from
    /// arbitrary states. Shares not held by `holders` are attributed to the
    /// treasury.
    pub fn from_parts(
        reserves: Vec<T>,
        target_balance: T,
        holders: impl IntoIterator<Item = (String, T)>,
        treasury_shares: T,
    ) -> Result<Self> {
        if reserves.len() < 3 {
            return Err(Error::InvalidMarket(
                "need collateral plus >= 2 outcome reserves".into(),
            ));
        }
        if reserves.iter().any(|r| r.is_negative()) || target_balance.is_negative() {
            return Err(Error::NegativeAmount("pool parts".into()));
        }
        let lp_shares: BTreeMap<String, T> = holders.into_iter().collect();
        let total_supply = lp_shares.values().fold(treasury_shares, |acc, &s| acc + s);
        Ok(PoolState {
            reserves,
            total_supply,
            target_balance,
            fee_accrued: T::zero(),
            treasury_shares,
            lp_shares,
        })
    }

    pub fn total_supply(&self) -> T {
        self.total_supply
    }

    pub fn target_balance(&self) -> T {
        self.target_balance
    }

    pub fn treasury_shares(&self) -> T {
        self.treasury_shares
    }

    pub fn shares_of(&self, account: &str) -> T {
        self.lp_shares.get(account).copied().unwrap_or_else(T::zero)
    }

    pub fn lp_shares(&self) -> impl Iterator<Item = (&str, T)> {
        self.lp_shares.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Deposits collateral and mints LP shares at `amount * TS / TV`, using
    /// supply and value from before the deposit. The first deposit mints 1:1.
    pub fn add_liquidity(&mut self, account: &str, amount: T, fair: &FairPrices<T>) -> Result<T> {
        if amount <= T::zero() {
            return Err(Error::NonPositiveAmount(format!("{amount:?}")));
        }
        let shares = if self.total_supply.is_zero() {
            amount
        } else {
            let value = self.total_value(fair);
            if value <= T::zero() {
                return Err(Error::EmptyPool);
            }
            amount * self.total_supply / value
        };
        self.reserves[0] = self.reserves[0] + amount;
        self.target_balance = self.target_balance + amount;
        self.total_supply = self.total_supply + shares;
        let held = self.lp_shares.entry(account.to_string()).or_insert_with(T::zero);
        *held = *held + shares;
        Ok(shares)
    }

    /// Burns `shares` and pays out `R0 * shares / TS` collateral. Outcome pools
    /// are untouched; the target balance shrinks by the burned fraction.
    pub fn remove_liquidity(&mut self, account: &str, shares: T) -> Result<T> {
        if shares <= T::zero() {
            return Err(Error::NonPositiveAmount(format!("{shares:?}")));
        }
        let held = self.shares_of(account);
        if held < shares {
            return Err(Error::InsufficientShares {
                account: account.to_string(),
                needed: format!("{shares:?}"),
                available: format!("{held:?}"),
            });
        }
        let (payout, target_cut) = if shares == self.total_supply {
            (self.reserves[0], self.target_balance)
        } else {
            (
                self.reserves[0] * shares / self.total_supply,
                self.target_balance * shares / self.total_supply,
            )
        };
        self.reserves[0] = self.reserves[0] - payout;
        self.target_balance = self.target_balance - target_cut;
        self.total_supply = self.total_supply - shares;
        let remaining = held - shares;
        if remaining.is_zero() {
            self.lp_shares.remove(account);
        } else {
            self.lp_shares.insert(account.to_string(), remaining);
        }
        Ok(payout)
    }

    /// Same state expressed in another scalar type.
    pub fn convert<U: Scalar>(&self) -> PoolState<U> {
        let c = |v: T| U::from_f64_lossy(v.as_f64());
        let lp_shares: BTreeMap<String, U> = self.lp_shares.iter().map(|(k, &v)| (k.clone(), c(v))).collect();
        let treasury_shares = c(self.treasury_shares);
        // Rebuilt from the converted parts so the share identity holds exactly.
        let total_supply = lp_shares.values().fold(treasury_shares, |acc, &s| acc + s);
        PoolState {
            reserves: self.reserves.iter().map(|&r| c(r)).collect(),
            total_supply,
            target_balance: c(self.target_balance),
            fee_accrued: c(self.fee_accrued),
            treasury_shares,
            lp_shares,
        }
    }

    fn check_conserved_shares(&self) -> bool {
        let sum = self.lp_shares.values().fold(self.treasury_shares, |acc, &s| acc + s);
        // Exact for fixed point and rationals; floats get rounding slack.
        sum == self.total_supply || relative_error(sum.as_f64(), self.total_supply.as_f64()) <= 1e-12
    }
}

impl<T: Scalar> Engine<T> for PoolState<T> {
    fn kind(&self) -> EngineKind {
        EngineKind::Uamm
    }

    fn reserves(&self) -> &[T] {
        &self.reserves
    }

    fn fee_accrued(&self) -> T {
        self.fee_accrued
    }

    /// Mint the wager into a full outcome set, fold the collateral pool into
    /// every outcome pool, swap each non-chosen token for the chosen one, then
    /// merge the common minimum back into collateral and mint treasury shares.
    fn execute_buy(&mut self, fair: &FairPrices<T>, outcome: usize, wager: T, fee_rate: T) -> Result<BuyFill<T>> {
        let k = self.outcomes();
        if fair.outcomes() != k {
            return Err(Error::InvalidPrices(format!(
                "{} prices for a {k}-outcome pool",
                fair.outcomes()
            )));
        }
        fair.check_outcome(outcome)?;
        if wager.is_negative() {
            return Err(Error::NegativeAmount(format!("{wager:?}")));
        }
        if wager.is_zero() {
            return Ok(BuyFill::empty(outcome));
        }

        let mut r = self.reserves.clone();
        let combined = r[0];
        for rk in &mut r[1..] {
            *rk = *rk + combined;
        }
        r[0] = T::zero();

        let mut odd = wager;
        let mut branches = Vec::with_capacity(k - 1);
        for j in (1..=k).filter(|&j| j != outcome) {
            r[j] = r[j] + wager;
            let curve = SwapCurve::new(r[outcome], self.target_balance, fair.get(j), fair.get(outcome));
            let swapped = curve.swap(wager)?;
            if swapped.amount_out > r[outcome] {
                return Err(Error::Unfillable {
                    outcome,
                    needed: format!("{:?}", swapped.amount_out),
                    available: format!("{:?}", r[outcome]),
                });
            }
            r[outcome] = r[outcome] - swapped.amount_out;
            odd = odd + swapped.amount_out;
            branches.push(swapped.branch);
        }

        let merged = r[1..].iter().copied().reduce(|a, b| a.min_of(b)).expect("k >= 2");
        for rk in &mut r[1..] {
            *rk = *rk - merged;
        }
        r[0] = merged;

        let value = r[1..]
            .iter()
            .zip(fair.as_slice())
            .fold(r[0], |acc, (&rk, &fk)| acc + fk * rk);
        let shares_minted = if self.total_supply.is_zero() {
            T::zero()
        } else if value <= T::zero() {
            return Err(Error::EmptyPool);
        } else {
            wager * self.total_supply / value
        };
        let fee = wager * fee_rate;

        self.reserves = r;
        self.total_supply = self.total_supply + shares_minted;
        self.treasury_shares = self.treasury_shares + shares_minted;
        self.fee_accrued = self.fee_accrued + fee;
        debug_assert!(self.reserves.iter().all(|x| !x.is_negative()));
        debug_assert!(self.check_conserved_shares());

        Ok(BuyFill {
            outcome,
            wager,
            odd,
            fee,
            shares_minted,
            combined,
            merged,
            branches,
        })
    }

    fn spot_price(&self, fair: &FairPrices<T>, outcome: usize) -> Result<f64> {
        let pool: PoolState<f64> = self.convert();
        let quote = pool.quote(&fair.convert(), outcome, SPOT_PROBE_WAGER, 0.0)?;
        Ok(quote.implied_price)
    }

    fn redeem_winner(&mut self, winner: usize) -> T {
        let won = self.reserves[winner];
        self.reserves[0] = self.reserves[0] + won;
        for rk in &mut self.reserves[1..] {
            *rk = T::zero();
        }
        won
    }

    fn snapshot_entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("pool.collateral".to_string(), fmt_scalar(self.reserves[0])),
            ("pool.fee_accrued".to_string(), fmt_scalar(self.fee_accrued)),
            ("pool.target_balance".to_string(), fmt_scalar(self.target_balance)),
            ("pool.total_supply".to_string(), fmt_scalar(self.total_supply)),
            ("pool.treasury_shares".to_string(), fmt_scalar(self.treasury_shares)),
        ];
        for (k, r) in self.reserves.iter().enumerate().skip(1) {
            out.push((format!("pool.outcome.{k}"), fmt_scalar(*r)));
        }
        for (account, shares) in &self.lp_shares {
            out.push((format!("pool.shares.{account}"), fmt_scalar(*shares)));
        }
        out
    }
}

pub(crate) fn fmt_scalar<T: Scalar>(v: T) -> String {
    format!("{v:?}")
}
