//! Numeric probes of the liquidity and swap rules.
//!
//! The property suite replays add/remove sequences on randomized pool states
//! and reports the largest relative disagreement per property. The
//! continuity grid measures the jump of the swap curve at both edges of its
//! transition branch. The conservation suite drives ledgers through random
//! operation sequences and checks exact token conservation after each one.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::amount::Amount;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::fair::FairPrices;
use crate::ledger::{CpmmMarket, Market, MarketSpec, UammMarket};
use crate::scalar::Scalar;
use crate::sim::rng::{substream, Stream};
use crate::uamm::{PoolState, SwapBranch, SwapCurve};

/// Tolerance of the property suite.
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

const PROBE_LP: &str = "probe";
const FUNDER: &str = "funder";

/// Largest relative error seen for each property.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropertyMax {
    /// `add(a); add(b)` against `add(a + b)`.
    pub add_additivity: f64,
    /// `remove(a); remove(b)` against `remove(a + b)`.
    pub remove_additivity: f64,
    /// `remove(add(d))` pays `d` and restores the state.
    pub add_then_remove: f64,
    /// `add(remove(s))` mints `s` and restores the state.
    pub remove_then_add: f64,
}

impl PropertyMax {
    fn absorb(&mut self, other: &PropertyMax) {
        self.add_additivity = self.add_additivity.max(other.add_additivity);
        self.remove_additivity = self.remove_additivity.max(other.remove_additivity);
        self.add_then_remove = self.add_then_remove.max(other.add_then_remove);
        self.remove_then_add = self.remove_then_add.max(other.remove_then_add);
    }

    pub fn additivity(&self) -> f64 {
        self.add_additivity.max(self.remove_additivity)
    }

    pub fn reversibility(&self) -> f64 {
        self.add_then_remove.max(self.remove_then_add)
    }
}

/// Outcome of the property suite for one scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub scalar: &'static str,
    pub states: usize,
    /// States whose outcome pools are all empty, so `R_0 = TV`.
    pub collateral_only_states: usize,
    pub all: PropertyMax,
    pub collateral_only: PropertyMax,
    /// Largest `R_0 / TV` shortfall over the sampled states.
    pub max_value_outside_collateral: f64,
}

impl PropertyReport {
    pub fn additivity_holds(&self) -> bool {
        self.all.additivity() <= PROPERTY_TOLERANCE
    }

    pub fn reversibility_holds(&self) -> bool {
        self.all.reversibility() <= PROPERTY_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.additivity_holds() && self.reversibility_holds()
    }
}

/// A randomized pool state with the prices it was built under.
#[derive(Debug, Clone)]
pub struct ProbeState<T> {
    pub pool: PoolState<T>,
    pub fair: FairPrices<T>,
}

/// Funds a pool from one or two LPs and then applies up to `max_buys`
/// random buys, so outcome pools, treasury shares and the target balance all
/// take values reachable by the market.
pub fn random_state<T: Scalar>(rng: &mut ChaCha8Rng, max_buys: usize) -> Result<ProbeState<T>> {
    let k = rng.random_range(2..=3);
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..0.8)).collect();
    let fair = FairPrices::<f64>::normalized(&weights)?.convert::<T>();
    let mut pool = PoolState::<T>::new(k);
    pool.add_liquidity(FUNDER, amount::<T>(rng, 5_000.0, 20_000.0), &fair)?;
    let buys = rng.random_range(0..=max_buys);
    for _ in 0..buys {
        let outcome = rng.random_range(1..=k);
        let wager = amount::<T>(rng, 1.0, 400.0);
        // Unfillable draws leave the pool untouched; the next draw continues.
        let _ = pool.execute_buy(&fair, outcome, wager, T::from_f64_lossy(0.025));
    }
    if rng.random_bool(0.5) {
        pool.add_liquidity(PROBE_LP, amount::<T>(rng, 1_000.0, 10_000.0), &fair)?;
    }
    Ok(ProbeState { pool, fair })
}

fn amount<T: Scalar>(rng: &mut ChaCha8Rng, low: f64, high: f64) -> T {
    // Whole cents keep fixed-point and float draws identical.
    T::from_f64_lossy((rng.random_range(low..high) * 100.0).round() / 100.0)
}

fn fields<T: Scalar>(pool: &PoolState<T>) -> Vec<f64> {
    let mut v: Vec<f64> = pool.reserves().iter().map(|r| r.as_f64()).collect();
    v.push(pool.total_supply().as_f64());
    v.push(pool.target_balance().as_f64());
    v.push(pool.treasury_shares().as_f64());
    v.extend(pool.lp_shares().map(|(_, s)| s.as_f64()));
    v
}

/// Relative error after discounting `quantum` of absolute rounding.
fn rel(a: f64, b: f64, quantum: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    let diff = ((a - b).abs() - quantum).max(0.0);
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn state_error<T: Scalar>(a: &PoolState<T>, b: &PoolState<T>, quantum: f64) -> f64 {
    let (fa, fb) = (fields(a), fields(b));
    if fa.len() != fb.len() {
        return f64::INFINITY;
    }
    fa.iter()
        .zip(&fb)
        .map(|(x, y)| rel(*x, *y, quantum))
        .fold(0.0, f64::max)
}

/// Checks every property on one state. `quantum` is the absolute rounding
/// slack of the scalar type: zero for floats, a few units of the last place
/// for fixed point.
pub fn check_state<T: Scalar>(state: &ProbeState<T>, rng: &mut ChaCha8Rng, quantum: f64) -> Result<PropertyMax> {
    let fair = &state.fair;
    let base = &state.pool;
    let a = amount::<T>(rng, 500.0, 5_000.0);
    let b = amount::<T>(rng, 500.0, 5_000.0);

    let mut split = base.clone();
    let sa = split.add_liquidity(PROBE_LP, a, fair)?;
    let sb = split.add_liquidity(PROBE_LP, b, fair)?;
    let mut joined = base.clone();
    let sab = joined.add_liquidity(PROBE_LP, a + b, fair)?;
    let add_additivity = state_error(&split, &joined, quantum).max(rel((sa + sb).as_f64(), sab.as_f64(), quantum));

    let held = base.shares_of(FUNDER);
    let s1 = held * T::from_f64_lossy(rng.random_range(0.1..0.45));
    let s2 = held * T::from_f64_lossy(rng.random_range(0.1..0.45));
    let mut split = base.clone();
    let p1 = split.remove_liquidity(FUNDER, s1)?;
    let p2 = split.remove_liquidity(FUNDER, s2)?;
    let mut joined = base.clone();
    let p12 = joined.remove_liquidity(FUNDER, s1 + s2)?;
    let remove_additivity = state_error(&split, &joined, quantum).max(rel((p1 + p2).as_f64(), p12.as_f64(), quantum));

    let mut round = base.clone();
    let minted = round.add_liquidity(FUNDER, a, fair)?;
    let paid = round.remove_liquidity(FUNDER, minted)?;
    let add_then_remove = state_error(&round, base, quantum).max(rel(paid.as_f64(), a.as_f64(), quantum));

    let mut round = base.clone();
    let paid = round.remove_liquidity(FUNDER, s1)?;
    let minted = round.add_liquidity(FUNDER, paid, fair)?;
    let remove_then_add = state_error(&round, base, quantum).max(rel(minted.as_f64(), s1.as_f64(), quantum));

    Ok(PropertyMax {
        add_additivity,
        remove_additivity,
        add_then_remove,
        remove_then_add,
    })
}

/// Absolute rounding slack allowed for fixed-point amounts: two truncations.
pub const FIXED_POINT_QUANTUM: f64 = 2e-6;

/// Runs the property suite over `states` randomized states.
pub fn property_suite<T: Scalar>(
    scalar: &'static str,
    states: usize,
    seed: u64,
    quantum: f64,
) -> Result<PropertyReport> {
    let mut rng = substream(seed, 0, Stream::Setup);
    let mut all = PropertyMax::default();
    let mut collateral_only = PropertyMax::default();
    let mut n_collateral = 0;
    let mut outside = 0.0f64;
    for _ in 0..states {
        let state = random_state::<T>(&mut rng, 30)?;
        let m = check_state(&state, &mut rng, quantum)?;
        all.absorb(&m);
        let r0 = state.pool.collateral().as_f64();
        let tv = state.pool.total_value(&state.fair).as_f64();
        outside = outside.max(1.0 - r0 / tv);
        if state.pool.reserves()[1..].iter().all(|r| r.is_zero()) {
            n_collateral += 1;
            collateral_only.absorb(&m);
        }
    }
    Ok(PropertyReport {
        scalar,
        states,
        collateral_only_states: n_collateral,
        all,
        collateral_only,
        max_value_outside_collateral: outside,
    })
}

/// Jump of the swap curve at one transition edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityPoint {
    /// Fair exchange rate `f_in / f_out`.
    pub rho: f64,
    pub reserve: f64,
    /// Fair output `rho * input`.
    pub delta: f64,
    /// Output of the transition branch at `TB = R - delta`.
    pub lower_transition: f64,
    /// Surplus-branch output at the same point.
    pub lower_surplus: f64,
    /// Transition minus deficit output at `TB = R`.
    pub upper_gap: f64,
}

impl ContinuityPoint {
    pub fn lower_gap(&self) -> f64 {
        self.lower_transition - self.lower_surplus
    }
}

/// Evaluates both edges of the transition branch on a grid of rates,
/// reserves and input sizes.
pub fn continuity_grid(rhos: &[f64], reserves: &[f64], inputs: &[f64]) -> Result<Vec<ContinuityPoint>> {
    let mut out = Vec::new();
    for &rho in rhos {
        // f_in / f_out = rho with f_in + f_out = 1.
        let f_out = 1.0 / (1.0 + rho);
        let f_in = 1.0 - f_out;
        for &reserve in reserves {
            for &input in inputs {
                let probe = SwapCurve::new(reserve, reserve, f_in, f_out);
                let delta = probe.fair_output(input);
                if delta >= reserve {
                    continue;
                }
                let lower = SwapCurve::new(reserve, reserve - delta, f_in, f_out);
                debug_assert_eq!(lower.branch(input), SwapBranch::Transition);
                let lower_transition = lower.swap(input)?.amount_out;
                let upper_transition = probe.swap(input)?.amount_out;
                let deficit = reserve * reserve * delta / (reserve * reserve + reserve * delta);
                out.push(ContinuityPoint {
                    rho,
                    reserve,
                    delta,
                    lower_transition,
                    lower_surplus: delta,
                    upper_gap: upper_transition - deficit,
                });
            }
        }
    }
    Ok(out)
}

pub const CONTINUITY_RHOS: [f64; 7] = [0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0];
pub const CONTINUITY_RESERVES: [f64; 3] = [1_000.0, 10_000.0, 100_000.0];
pub const CONTINUITY_INPUTS: [f64; 4] = [1.0, 10.0, 100.0, 500.0];

/// Largest relative jump per rate, `|gap| / delta`, on the default grid.
pub fn continuity_summary(points: &[ContinuityPoint]) -> Vec<(f64, f64, f64)> {
    let mut rhos: Vec<f64> = points.iter().map(|p| p.rho).collect();
    rhos.dedup();
    rhos.into_iter()
        .map(|rho| {
            let at: Vec<&ContinuityPoint> = points.iter().filter(|p| p.rho == rho).collect();
            let lower = at.iter().map(|p| p.lower_gap().abs() / p.delta).fold(0.0, f64::max);
            let upper = at.iter().map(|p| p.upper_gap.abs() / p.delta).fold(0.0, f64::max);
            (rho, lower, upper)
        })
        .collect()
}

/// One ledger operation of the conservation suite.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Deposit {
        account: usize,
        amount: Amount,
    },
    Mint {
        account: usize,
        amount: Amount,
    },
    Merge {
        account: usize,
        amount: Amount,
    },
    AddLiquidity {
        account: usize,
        amount: Amount,
    },
    /// Burns this fraction of the account's shares.
    RemoveLiquidity {
        account: usize,
        fraction: f64,
    },
    Buy {
        account: usize,
        outcome: usize,
        wager: Amount,
    },
}

const ACCOUNTS: [&str; 3] = ["alice", "bob", "carol"];

/// Counts from a conservation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConservationReport {
    pub markets: usize,
    pub operations: usize,
    /// Operations the ledger refused, for example for lack of funds.
    pub refused: usize,
    pub buys: usize,
    pub resolutions: usize,
}

fn cents(rng: &mut ChaCha8Rng, max: f64) -> Amount {
    Amount::from_micros((rng.random_range(0.0..max) * 100.0).round() as i128 * 10_000)
}

/// Draws a random operation for a market with `k` outcomes.
pub fn random_op(rng: &mut ChaCha8Rng, k: usize) -> Op {
    let account = rng.random_range(0..ACCOUNTS.len());
    match rng.random_range(0..10) {
        0 => Op::Deposit {
            account,
            amount: cents(rng, 2_000.0),
        },
        1 => Op::Mint {
            account,
            amount: cents(rng, 300.0),
        },
        2 => Op::Merge {
            account,
            amount: cents(rng, 300.0),
        },
        3 => Op::AddLiquidity {
            account,
            amount: cents(rng, 2_000.0),
        },
        4 => Op::RemoveLiquidity {
            account,
            fraction: rng.random_range(0.0..=1.0),
        },
        _ => Op::Buy {
            account,
            outcome: rng.random_range(1..=k),
            wager: cents(rng, 200.0),
        },
    }
}

fn apply<E: Engine<Amount>>(
    market: &mut Market<E>,
    op: &Op,
    liquidity: &mut dyn FnMut(&mut Market<E>, &Op) -> Result<()>,
) -> Result<()> {
    match *op {
        Op::Deposit { account, amount } => market.deposit(ACCOUNTS[account], amount),
        Op::Mint { account, amount } => market.mint(ACCOUNTS[account], amount),
        Op::Merge { account, amount } => market.merge(ACCOUNTS[account], amount),
        Op::Buy {
            account,
            outcome,
            wager,
        } => market.buy(ACCOUNTS[account], outcome, wager).map(|_| ()),
        Op::AddLiquidity { .. } | Op::RemoveLiquidity { .. } => liquidity(market, op),
    }
}

/// Applies `ops`, checking conservation after each; refused operations must
/// leave the market unchanged.
pub fn run_ops<E: Engine<Amount> + PartialEq>(
    market: &mut Market<E>,
    ops: &[Op],
    liquidity: &mut dyn FnMut(&mut Market<E>, &Op) -> Result<()>,
    report: &mut ConservationReport,
) -> Result<()> {
    for op in ops {
        let before = market.clone();
        report.operations += 1;
        match apply(market, op, liquidity) {
            Ok(()) => {
                if matches!(op, Op::Buy { .. }) {
                    report.buys += 1;
                }
            }
            Err(Error::Invariant(msg)) => return Err(Error::Invariant(msg)),
            Err(_) => {
                report.refused += 1;
                if *market != before {
                    return Err(Error::Invariant(format!("refused {op:?} changed the market")));
                }
            }
        }
        market
            .check_invariants()
            .map_err(|e| Error::Invariant(format!("after {op:?}: {e}")))?;
    }
    Ok(())
}

fn uamm_liquidity(market: &mut UammMarket, op: &Op) -> Result<()> {
    match *op {
        Op::AddLiquidity { account, amount } => market.add_liquidity(ACCOUNTS[account], amount).map(|_| ()),
        Op::RemoveLiquidity { account, fraction } => {
            let held = market.lp_shares(ACCOUNTS[account]);
            let shares = Amount::from_micros((held.micros() as f64 * fraction).round() as i128);
            market.remove_liquidity(ACCOUNTS[account], shares).map(|_| ())
        }
        _ => Ok(()),
    }
}

fn settle<E: Engine<Amount>>(market: &mut Market<E>, winner: usize) -> Result<()> {
    market.close_betting()?;
    market.check_invariants()?;
    market.resolve("oracle", winner)?;
    market.redeem_pool()?;
    for a in ACCOUNTS.iter().copied().chain(["lp"]) {
        market.redeem(a)?;
        market.check_invariants()?;
    }
    if !market.locked().is_zero() {
        return Err(Error::Invariant(format!(
            "{} still locked after redemption",
            market.locked()
        )));
    }
    Ok(())
}

/// Runs at least `operations` random operations over a sequence of UAMM and
/// constant-product markets with two or three outcomes, each funded by a
/// pool LP and settled at the end.
pub fn conservation_suite(seed: u64, operations: usize, per_market: usize) -> Result<ConservationReport> {
    let mut report = ConservationReport::default();
    let mut index = 0u64;
    while report.operations < operations {
        let mut rng = substream(seed, index, Stream::Bettors);
        let k = rng.random_range(2..=3);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..0.9)).collect();
        let fair = FairPrices::<Amount>::normalized(&weights)?;
        let spec = MarketSpec::new(format!("c{index}"), k, "oracle");
        let ops: Vec<Op> = (0..per_market).map(|_| random_op(&mut rng, k)).collect();
        let winner = rng.random_range(1..=k);
        let funding = Amount::from_units(rng.random_range(500..20_000));
        if index.is_multiple_of(2) {
            let mut m = UammMarket::new(spec, fair)?;
            m.deposit("lp", funding)?;
            m.add_liquidity("lp", funding)?;
            run_ops(&mut m, &ops, &mut uamm_liquidity, &mut report)?;
            settle(&mut m, winner)?;
        } else {
            let mut m = CpmmMarket::seeded(spec, fair, "lp", funding)?;
            run_ops(&mut m, &ops, &mut |_, _| Ok(()), &mut report)?;
            settle(&mut m, winner)?;
        }
        report.markets += 1;
        report.resolutions += 1;
        index += 1;
    }
    Ok(report)
}
