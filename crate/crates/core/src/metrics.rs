//! Pool performance metrics.
//!
//! The headline metrics are evaluated over the conditional-token pools
//! `R_1..R_K` exactly as the pool stores them (after the merge step, so
//! collateral in `R_0` is not counted):
//!
//! * `EV(t) = sum_k f_k * R_k - (1 - f_k) * (Z - R_k)`, `Z = sum_k R_k`
//! * per-market impermanent PnL: `sum_k f_k * (R_k,T - R_k,0)`
//! * per-market permanent PnL: `R_w,T - R_w,0` for the sampled winner `w`
//! * `EIP` and `EPP` are their means over markets, `TP = M * EPP`
//!
//! The same functions applied to effective balances `R_0 + R_k` give the
//! pool's full claim on each outcome; reports carry that variant alongside,
//! together with the change in total value.

use crate::amount::Amount;
use crate::engine::EngineKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean and sample standard deviation of a set of values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); zero for one value.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    /// Sums in ascending order so the result does not depend on input order.
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let mut sq: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
            sq.sort_by(f64::total_cmp);
            (sq.iter().sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(MeanStd { mean, std, n })
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std / (self.n as f64).sqrt()
        }
    }
}

/// Expected value of the pool.
pub fn ev<T: Scalar>(balances: &[T], fair: &[T]) -> T {
    assert_eq!(balances.len(), fair.len(), "one fair price per pool");
    let z = balances.iter().fold(T::zero(), |acc, &r| acc + r);
    balances
        .iter()
        .zip(fair)
        .fold(T::zero(), |acc, (&r, &f)| acc + f * r - (T::one() - f) * (z - r))
}

/// Start and end balances of one market, with its resolved winner.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath<T> {
    pub fair: Vec<T>,
    pub initial: Vec<T>,
    pub terminal: Vec<T>,
    /// 1-based winning outcome, once sampled.
    pub winner: Option<usize>,
}

impl<T: Scalar> MarketPath<T> {
    fn deltas(&self) -> impl Iterator<Item = T> + '_ {
        self.terminal.iter().zip(&self.initial).map(|(&t, &i)| t - i)
    }

    /// `sum_k f_k * (R_k,T - R_k,0)`.
    pub fn impermanent_pnl(&self) -> T {
        self.deltas()
            .zip(&self.fair)
            .fold(T::zero(), |acc, (d, &f)| acc + f * d)
    }

    /// `R_w,T - R_w,0` for the sampled winner.
    pub fn permanent_pnl(&self) -> Result<T> {
        let w = self.winner.ok_or(Error::MissingWinner)?;
        if w == 0 || w > self.initial.len() {
            return Err(Error::UnknownOutcome {
                outcome: w,
                outcomes: self.initial.len(),
            });
        }
        Ok(self.terminal[w - 1] - self.initial[w - 1])
    }
}

/// Expected impermanent PnL over markets.
pub fn eip<T: Scalar>(markets: &[MarketPath<T>]) -> Result<MeanStd> {
    let v: Vec<f64> = markets.iter().map(|m| m.impermanent_pnl().as_f64()).collect();
    MeanStd::of(&v)
}

/// Expected permanent PnL over markets. Every market needs a winner.
pub fn epp<T: Scalar>(markets: &[MarketPath<T>]) -> Result<MeanStd> {
    let v = markets
        .iter()
        .map(|m| m.permanent_pnl().map(|p| p.as_f64()))
        .collect::<Result<Vec<_>>>()?;
    MeanStd::of(&v)
}

/// Total PnL, `M * EPP`.
pub fn total_pnl(epp: &MeanStd) -> f64 {
    epp.n as f64 * epp.mean
}

/// Overround of a set of implied prices: `sum_i p_i - 1`.
pub fn overround(implied: &[f64]) -> f64 {
    implied.iter().sum::<f64>() - 1.0
}

/// Mean overround over observed price vectors.
pub fn vigorish(overrounds: &[f64]) -> Result<f64> {
    MeanStd::of(overrounds).map(|m| m.mean)
}

/// Everything a finished market contributes to a report.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketStats {
    /// Conditional pools `R_1..R_K`.
    pub path: MarketPath<f64>,
    /// Effective balances `R_0 + R_k`.
    pub effective: MarketPath<f64>,
    /// EV after every bet attempt, starting with the initial state.
    pub ev_path: Vec<f64>,
    pub tv_initial: f64,
    pub tv_terminal: f64,
    pub attempted: usize,
    pub accepted: usize,
    pub volume: Amount,
    pub fees: Amount,
    /// Overround after each accepted bet.
    pub overrounds: Vec<f64>,
}

impl MarketStats {
    pub fn rejected(&self) -> usize {
        self.attempted - self.accepted
    }
}

/// Aggregate results of a set of markets.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub engine: EngineKind,
    pub markets: usize,
    /// Mean EV across markets at each step; shorter markets hold their last value.
    pub ev_series: Vec<f64>,
    pub eip: MeanStd,
    pub epp: MeanStd,
    /// `M * EPP`.
    pub tp: f64,
    /// Permanent PnL plus fee revenue, per market.
    pub epp_with_fees: MeanStd,
    /// Permanent PnL over effective balances `R_0 + R_k`.
    pub epp_effective: MeanStd,
    /// `TV_T - TV_0` per market, collateral pool included.
    pub tv_pnl: MeanStd,
    /// Bet attempts, rejected ones included.
    pub total_bets: usize,
    pub accepted_bets: usize,
    /// Sum of accepted wagers.
    pub volume: Amount,
    pub fee_revenue: Amount,
    pub rejection_rate: f64,
    /// Mean overround after accepted bets; zero when no bet was accepted.
    pub vigorish: f64,
}

impl MetricsReport {
    pub fn from_markets(engine: EngineKind, markets: &[MarketStats]) -> Result<Self> {
        if markets.is_empty() {
            return Err(Error::EmptyInput);
        }
        let paths: Vec<MarketPath<f64>> = markets.iter().map(|m| m.path.clone()).collect();
        let eip = eip(&paths)?;
        let epp = epp(&paths)?;
        let effective: Vec<MarketPath<f64>> = markets.iter().map(|m| m.effective.clone()).collect();
        let with_fees = markets
            .iter()
            .map(|m| Ok(m.path.permanent_pnl()? + m.fees.to_f64()))
            .collect::<Result<Vec<f64>>>()?;
        let tv: Vec<f64> = markets.iter().map(|m| m.tv_terminal - m.tv_initial).collect();

        let total_bets: usize = markets.iter().map(|m| m.attempted).sum();
        let accepted_bets: usize = markets.iter().map(|m| m.accepted).sum();
        let volume: Amount = markets.iter().map(|m| m.volume).sum();
        let fee_revenue: Amount = markets.iter().map(|m| m.fees).sum();
        let rejection_rate = if total_bets == 0 {
            0.0
        } else {
            (total_bets - accepted_bets) as f64 / total_bets as f64
        };
        let overrounds: Vec<f64> = markets.iter().flat_map(|m| m.overrounds.iter().copied()).collect();
        let vigorish = if overrounds.is_empty() {
            0.0
        } else {
            vigorish(&overrounds)?
        };

        Ok(MetricsReport {
            engine,
            markets: markets.len(),
            ev_series: mean_series(markets.iter().map(|m| m.ev_path.as_slice())),
            tp: total_pnl(&epp),
            eip,
            epp,
            epp_with_fees: MeanStd::of(&with_fees)?,
            epp_effective: self::epp(&effective)?,
            tv_pnl: MeanStd::of(&tv)?,
            total_bets,
            accepted_bets,
            volume,
            fee_revenue,
            rejection_rate,
            vigorish,
        })
    }
}

/// Pointwise mean of series of unequal length, each padded with its last value.
pub fn mean_series<'a>(series: impl Iterator<Item = &'a [f64]> + Clone) -> Vec<f64> {
    let len = series.clone().map(<[f64]>::len).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let mut col: Vec<f64> = series
                .clone()
                .filter_map(|s| s.get(t).or_else(|| s.last()).copied())
                .collect();
            col.sort_by(f64::total_cmp);
            col.iter().sum::<f64>() / col.len() as f64
        })
        .collect()
}
