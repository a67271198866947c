//! Constant-product comparator.
//!
//! Prices come from reserves alone: every inner swap of the buy pipeline
//! follows `x * y = k` between the token being sold and the token bought, with
//! no reference to fair prices after seeding.

use crate::engine::{BuyFill, Engine, EngineKind, SPOT_PROBE_WAGER};
use crate::error::{Error, Result};
use crate::fair::FairPrices;
use crate::scalar::Scalar;
use crate::uamm::fmt_scalar;

/// `y - x * y / (x + d)`, written as `y * d / (x + d)`.
pub fn cpmm_swap<T: Scalar>(input: T, reserve_in: T, reserve_out: T) -> Result<T> {
    if input.is_negative() {
        return Err(Error::NegativeAmount(format!("{input:?}")));
    }
    if input.is_zero() {
        return Ok(T::zero());
    }
    if reserve_in <= T::zero() || reserve_out <= T::zero() {
        return Err(Error::EmptyPool);
    }
    Ok(reserve_out * input / (reserve_in + input))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpmmPool<T> {
    reserves: Vec<T>,
    fee_accrued: T,
}

/// A seeded pool and the outcome tokens handed back to the funder.
#[derive(Debug, Clone, PartialEq)]
pub struct CpmmSeed<T> {
    pub pool: CpmmPool<T>,
    /// Sets minted to build the reserves; this much collateral is locked.
    pub minted: T,
    /// Per-outcome tokens returned to the funder, outcomes `1..=K`.
    pub refund: Vec<T>,
}

impl<T: Scalar> CpmmPool<T> {
    pub fn from_reserves(reserves: Vec<T>) -> Result<Self> {
        if reserves.len() < 3 || reserves[1..].iter().any(|r| *r <= T::zero()) || reserves[0].is_negative() {
            return Err(Error::InvalidMarket(format!(
                "constant-product reserves must be positive, got {reserves:?}"
            )));
        }
        Ok(CpmmPool {
            reserves,
            fee_accrued: T::zero(),
        })
    }

    /// Reserves `R_k = funding / (K * f_k)`, so the pool is worth `funding`
    /// at fair prices and its marginal prices equal `f`. Building them mints
    /// `max_k R_k` sets; the surplus of every other outcome goes back to the funder.
    pub fn seeded(funding: T, fair: &FairPrices<T>) -> Result<CpmmSeed<T>> {
        if funding <= T::zero() {
            return Err(Error::NonPositiveAmount(format!("{funding:?}")));
        }
        let k = T::from_count(fair.outcomes());
        let mut reserves = vec![T::zero()];
        reserves.extend(fair.as_slice().iter().map(|&f| funding / (k * f)));
        let minted = reserves[1..]
            .iter()
            .copied()
            .reduce(|a, b| a.max_of(b))
            .expect("k >= 2");
        let refund = reserves[1..].iter().map(|&r| minted - r).collect();
        Ok(CpmmSeed {
            pool: CpmmPool::from_reserves(reserves)?,
            minted,
            refund,
        })
    }

    /// `x * y` for an outcome pair.
    pub fn pair_invariant(&self, a: usize, b: usize) -> T {
        self.reserves[a] * self.reserves[b]
    }

    pub fn convert<U: Scalar>(&self) -> CpmmPool<U> {
        let c = |v: T| U::from_f64_lossy(v.as_f64());
        CpmmPool {
            reserves: self.reserves.iter().map(|&r| c(r)).collect(),
            fee_accrued: c(self.fee_accrued),
        }
    }
}

impl<T: Scalar> Engine<T> for CpmmPool<T> {
    fn kind(&self) -> EngineKind {
        EngineKind::Cpmm
    }

    fn reserves(&self) -> &[T] {
        &self.reserves
    }

    fn fee_accrued(&self) -> T {
        self.fee_accrued
    }

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
        for j in (1..=k).filter(|&j| j != outcome) {
            let out = cpmm_swap(wager, r[j], r[outcome])?;
            r[j] = r[j] + wager;
            r[outcome] = r[outcome] - out;
            odd = odd + out;
        }

        let merged = r[1..].iter().copied().reduce(|a, b| a.min_of(b)).expect("k >= 2");
        for rk in &mut r[1..] {
            *rk = *rk - merged;
        }
        r[0] = merged;
        let fee = wager * fee_rate;

        self.reserves = r;
        self.fee_accrued = self.fee_accrued + fee;
        Ok(BuyFill {
            outcome,
            wager,
            odd,
            fee,
            shares_minted: T::zero(),
            combined,
            merged,
            branches: Vec::new(),
        })
    }

    fn spot_price(&self, fair: &FairPrices<T>, outcome: usize) -> Result<f64> {
        let pool: CpmmPool<f64> = self.convert();
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
        ];
        for (k, r) in self.reserves.iter().enumerate().skip(1) {
            out.push((format!("pool.outcome.{k}"), fmt_scalar(*r)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_swap() {
        let out: f64 = cpmm_swap(100.0, 10_000.0, 10_000.0).unwrap();
        assert!((out - (10_000.0 - 1e8 / 10_100.0)).abs() < 1e-9);
        assert!((out - 99.009_900_990_099).abs() < 1e-9);
        assert_eq!(cpmm_swap(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(cpmm_swap(1e-9, 10.0, 10.0).unwrap() < 1e-9);
        assert!(cpmm_swap(1e12, 10.0, 10.0).unwrap() < 10.0);
    }

    #[test]
    fn seeding_matches_fair_prices() {
        let f = FairPrices::<f64>::from_f64(&[0.8, 0.2]).unwrap();
        let seed = CpmmPool::seeded(10_000.0, &f).unwrap();
        assert!((seed.pool.total_value(&f) - 10_000.0).abs() < 1e-9);
        assert!((seed.minted - 25_000.0).abs() < 1e-9);
        assert!((seed.refund[0] - 18_750.0).abs() < 1e-9);
        assert_eq!(seed.refund[1], 0.0);
        for i in 1..=2 {
            let p = seed.pool.spot_price(&f, i).unwrap();
            assert!((p - f.get(i)).abs() < 1e-6, "{i}: {p}");
        }
    }

    #[test]
    fn three_way_seeding_prices() {
        let f = FairPrices::<f64>::from_f64(&[0.5, 0.3, 0.2]).unwrap();
        let seed = CpmmPool::seeded(9_000.0, &f).unwrap();
        for i in 1..=3 {
            assert!((seed.pool.spot_price(&f, i).unwrap() - f.get(i)).abs() < 1e-6);
        }
    }

    #[test]
    fn buy_on_deep_pool_is_near_fair_minus_curve() {
        let f = FairPrices::<f64>::from_f64(&[0.5, 0.5]).unwrap();
        let seed = CpmmPool::seeded(10_000.0, &f).unwrap();
        let q = seed.pool.quote(&f, 1, 100.0, 0.0).unwrap();
        let expected = 100.0 + cpmm_swap(100.0, 10_000.0, 10_000.0).unwrap();
        assert!((q.odd - expected).abs() < 1e-9);
        assert!(q.odd < 200.0);
    }

    #[test]
    fn buy_sweeps_common_minimum() {
        let f = FairPrices::<f64>::from_f64(&[0.3, 0.7]).unwrap();
        let mut pool = CpmmPool::seeded(10_000.0, &f).unwrap().pool;
        for i in [1, 2, 2, 1, 1] {
            pool.execute_buy(&f, i, 37.0, 0.0).unwrap();
            let r = pool.reserves();
            assert_eq!(r[1].min(r[2]), 0.0);
        }
    }

    #[test]
    fn zero_wager_zero_odd() {
        let f = FairPrices::<f64>::from_f64(&[0.5, 0.5]).unwrap();
        let pool = CpmmPool::seeded(10.0, &f).unwrap().pool;
        assert_eq!(pool.quote(&f, 2, 0.0, 0.0).unwrap().odd, 0.0);
    }
}
