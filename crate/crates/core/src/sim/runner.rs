//! Market orchestration: single, multi-market, full and sweep experiments.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;

use crate::amount::Amount;
use crate::baseline::CpmmPool;
use crate::engine::{Engine, EngineKind};
use crate::error::{Error, Result};
use crate::fair::FairPrices;
use crate::ledger::{BetRecord, CpmmMarket, Market, MarketSpec, UammMarket};
use crate::metrics::{self, MarketPath, MarketStats, MeanStd, MetricsReport};
use crate::sim::bettor::{decide_rejection, draw_bettor, Decision};
use crate::sim::config::{BetCount, OutcomeCount, ProbSpec, SideMode, SimConfig, BET_COUNT_MAX, BET_COUNT_MIN};
use crate::sim::rng::{substream, Stream};
use crate::uamm::PoolState;

/// Account that provides liquidity.
pub const LP_ACCOUNT: &str = "lp";
/// Account through which every simulated bet is placed.
pub const BETTOR_ACCOUNT: &str = "bettors";
/// Oracle allowed to resolve simulated markets.
pub const ORACLE: &str = "oracle";

/// True probabilities of the probability sweep.
pub const PROB_GRID: [f64; 7] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
/// Fixed rejection thresholds of the rejection sweep.
pub const REJECTION_GRID: [f64; 5] = [0.025, 0.035, 0.045, 0.065, 1.0];
/// Bets per market of the bet-count sweep.
pub const BET_GRID: [usize; 4] = [10, 50, 100, 500];

/// Per-market parameters drawn from the setup stream.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSetup {
    pub index: u64,
    pub fair: FairPrices<Amount>,
    pub n_bets: usize,
    pub funding: Amount,
}

impl MarketSetup {
    pub fn outcomes(&self) -> usize {
        self.fair.outcomes()
    }

    pub fn market_id(&self) -> String {
        format!("m{:06}", self.index)
    }
}

/// One bet attempt and the pool state after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// 1-based attempt number.
    pub step: usize,
    pub outcome: usize,
    pub wager: Amount,
    pub threshold: f64,
    /// Quoted implied price; `NaN` when the pool could not fill the bet.
    pub implied_price: f64,
    pub slippage: f64,
    pub accepted: bool,
    pub unfillable: bool,
    /// Outcome tokens paid; zero when rejected.
    pub odd: Amount,
    pub fee: Amount,
    /// Pool reserves `[R_0, R_1..R_K]` after the attempt.
    pub reserves: Vec<f64>,
    pub ev: f64,
    /// Impermanent PnL of this market so far.
    pub eip: f64,
    /// Rejections so far.
    pub rejections: usize,
}

/// A finished, resolved market.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketRun {
    pub setup: MarketSetup,
    pub engine: EngineKind,
    pub steps: Vec<Step>,
    pub bets: Vec<BetRecord>,
    /// Pool reserves `[R_0, R_1..R_K]` before the first and after the last bet.
    pub initial: Vec<Amount>,
    pub terminal: Vec<Amount>,
    pub winner: usize,
    pub stats: MarketStats,
}

/// Markets of one configuration and their aggregate report.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: SimConfig,
    pub runs: Vec<MarketRun>,
    pub report: MetricsReport,
}

/// Draws a market's outcome count, probabilities and bet count.
pub fn market_setup(cfg: &SimConfig, index: u64) -> Result<MarketSetup> {
    let mut rng = substream(cfg.seed, index, Stream::Setup);
    let k = match cfg.k {
        OutcomeCount::Fixed(k) => k,
        OutcomeCount::Range { min, max } => rng.random_range(min..=max),
    };
    let fair = match &cfg.probs {
        ProbSpec::Fixed(p) => FairPrices::from_f64(p)?,
        ProbSpec::Uniform { low, high } => {
            let mut draw = || {
                if low == high {
                    *low
                } else {
                    rng.random_range(*low..*high)
                }
            };
            if k == 2 {
                let p = draw();
                FairPrices::from_f64(&[p, 1.0 - p])?
            } else {
                let w: Vec<f64> = (0..k).map(|_| draw()).collect();
                FairPrices::normalized(&w)?
            }
        }
    };
    if fair.outcomes() != k {
        return Err(Error::InvalidConfig(format!(
            "{} probabilities for {k} outcomes",
            fair.outcomes()
        )));
    }
    let n_bets = match cfg.n_bets {
        BetCount::Fixed(n) => n,
        BetCount::LogNormal { mu, sigma } => {
            let dist = LogNormal::new(mu, sigma).map_err(|e| Error::InvalidConfig(format!("`n_bets`: {e}")))?;
            let n = dist.sample(&mut rng).round();
            (n.clamp(BET_COUNT_MIN as f64, BET_COUNT_MAX as f64)) as usize
        }
    };
    Ok(MarketSetup {
        index,
        fair,
        n_bets,
        funding: cfg.funding,
    })
}

/// Simulates one market end to end with the configured engine.
pub fn simulate_market(cfg: &SimConfig, setup: &MarketSetup) -> Result<MarketRun> {
    simulate_market_with(cfg, setup, cfg.engine)
}

/// Simulates one market with an explicit engine; bettors and winner depend
/// only on the seed and the market index.
pub fn simulate_market_with(cfg: &SimConfig, setup: &MarketSetup, engine: EngineKind) -> Result<MarketRun> {
    let spec = MarketSpec::new(setup.market_id(), setup.outcomes(), ORACLE).with_fee_rate(cfg.fee_rate);
    match engine {
        EngineKind::Uamm => {
            let mut market = UammMarket::new(spec, setup.fair.clone())?;
            market.deposit(LP_ACCOUNT, setup.funding)?;
            market.add_liquidity(LP_ACCOUNT, setup.funding)?;
            drive::<PoolState<Amount>>(market, cfg, setup)
        }
        EngineKind::Cpmm => {
            let market = CpmmMarket::seeded(spec, setup.fair.clone(), LP_ACCOUNT, setup.funding)?;
            drive::<CpmmPool<Amount>>(market, cfg, setup)
        }
    }
}

fn to_f64(v: &[Amount]) -> Vec<f64> {
    v.iter().map(|a| a.to_f64()).collect()
}

fn tv(reserves: &[Amount], fair: &[f64]) -> f64 {
    reserves[1..]
        .iter()
        .zip(fair)
        .fold(reserves[0].to_f64(), |acc, (r, f)| acc + f * r.to_f64())
}

fn conditional(reserves: &[f64]) -> Vec<f64> {
    reserves[1..].to_vec()
}

fn effective(reserves: &[f64]) -> Vec<f64> {
    reserves[1..].iter().map(|r| reserves[0] + r).collect()
}

fn drive<E: Engine<Amount>>(mut market: Market<E>, cfg: &SimConfig, setup: &MarketSetup) -> Result<MarketRun> {
    let engine = market.pool().kind();
    let fair = setup.fair.to_f64_vec();
    let initial = market.pool().reserves().to_vec();
    let initial_f = to_f64(&initial);
    let initial_pools = conditional(&initial_f);
    let tv_initial = tv(market.pool().reserves(), &fair);

    let mut rng = substream(cfg.seed, setup.index, Stream::Bettors);
    let mut steps = Vec::with_capacity(setup.n_bets);
    let mut ev_path = vec![metrics::ev(&initial_pools, &fair)];
    let mut overrounds = Vec::new();
    let (mut volume, mut fees, mut rejections) = (Amount::ZERO, Amount::ZERO, 0usize);

    for step in 1..=setup.n_bets {
        let draw = draw_bettor(&mut rng, cfg, &fair)?;
        let quote = match market.quote(draw.side, draw.wager) {
            Ok(q) => Some(q),
            Err(Error::Unfillable { .. }) => None,
            Err(e) => return Err(e),
        };
        let (implied_price, slippage) = quote
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |q| (q.implied_price, q.slippage));
        let accepted = quote
            .as_ref()
            .is_some_and(|q| decide_rejection(q.slippage, draw.threshold) == Decision::Accept);

        let (mut odd, mut fee) = (Amount::ZERO, Amount::ZERO);
        if let (true, Some(q)) = (accepted, &quote) {
            market.deposit(BETTOR_ACCOUNT, q.wager + q.fee)?;
            let record = market.buy(BETTOR_ACCOUNT, draw.side, draw.wager)?;
            odd = record.odd;
            fee = record.fee;
            volume += record.wager;
            fees += record.fee;
            let fair_prices = market.fair().clone();
            let spot = (1..=setup.outcomes())
                .map(|i| market.pool().spot_price(&fair_prices, i))
                .collect::<Result<Vec<f64>>>()?;
            overrounds.push(metrics::overround(&spot));
        } else {
            rejections += 1;
        }

        let reserves = to_f64(market.pool().reserves());
        let pools = conditional(&reserves);
        let ev = metrics::ev(&pools, &fair);
        let eip = pools
            .iter()
            .zip(&initial_pools)
            .zip(&fair)
            .map(|((b, i), f)| f * (b - i))
            .sum();
        ev_path.push(ev);
        steps.push(Step {
            step,
            outcome: draw.side,
            wager: draw.wager,
            threshold: draw.threshold,
            implied_price,
            slippage,
            accepted,
            unfillable: quote.is_none(),
            odd,
            fee,
            reserves,
            ev,
            eip,
            rejections,
        });
    }

    let terminal = market.pool().reserves().to_vec();
    let terminal_f = to_f64(&terminal);
    let tv_terminal = tv(market.pool().reserves(), &fair);
    let winner = sample_winner(cfg.seed, setup.index, &fair)?;

    market.close_betting()?;
    market.resolve(ORACLE, winner)?;
    market.redeem_pool()?;
    market.redeem(BETTOR_ACCOUNT)?;
    market.redeem(LP_ACCOUNT)?;
    market.check_invariants()?;
    if !market.locked().is_zero() {
        return Err(Error::Invariant(format!(
            "{}: {} collateral still locked after redemption",
            setup.market_id(),
            market.locked()
        )));
    }

    let accepted = steps.iter().filter(|s| s.accepted).count();
    let stats = MarketStats {
        path: MarketPath {
            fair: fair.clone(),
            initial: initial_pools,
            terminal: conditional(&terminal_f),
            winner: Some(winner),
        },
        effective: MarketPath {
            fair: fair.clone(),
            initial: effective(&initial_f),
            terminal: effective(&terminal_f),
            winner: Some(winner),
        },
        ev_path,
        tv_initial,
        tv_terminal,
        attempted: steps.len(),
        accepted,
        volume,
        fees,
        overrounds,
    };
    Ok(MarketRun {
        setup: setup.clone(),
        engine,
        bets: market.bets().to_vec(),
        steps,
        initial,
        terminal,
        winner,
        stats,
    })
}

/// One multinomial draw from the true probabilities.
pub fn sample_winner(seed: u64, index: u64, fair: &[f64]) -> Result<usize> {
    let mut rng = substream(seed, index, Stream::Winner);
    crate::sim::bettor::draw_side(&mut rng, SideMode::TrueProb, fair)
}

/// A single market with the config's seed, market index 0.
pub fn run_single_market(cfg: &SimConfig, seed: u64) -> Result<MarketRun> {
    cfg.validate()?;
    let cfg = SimConfig { seed, ..cfg.clone() };
    let setup = market_setup(&cfg, 0)?;
    simulate_market(&cfg, &setup)
}

/// Simulates the given market indices in parallel; results keep input order.
pub fn run_markets(cfg: &SimConfig, indices: &[u64]) -> Result<Vec<MarketRun>> {
    cfg.validate()?;
    indices
        .par_iter()
        .map(|&i| market_setup(cfg, i).and_then(|s| simulate_market(cfg, &s)))
        .collect()
}

/// `n_markets` independent markets, indices `0..n_markets`.
pub fn run_multi_market(cfg: &SimConfig) -> Result<Experiment> {
    let indices: Vec<u64> = (0..cfg.n_markets as u64).collect();
    experiment(cfg, run_markets(cfg, &indices)?)
}

fn experiment(cfg: &SimConfig, runs: Vec<MarketRun>) -> Result<Experiment> {
    let stats: Vec<MarketStats> = runs.iter().map(|r| r.stats.clone()).collect();
    Ok(Experiment {
        config: cfg.clone(),
        report: MetricsReport::from_markets(cfg.engine, &stats)?,
        runs,
    })
}

/// Totals of one trial of the full experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub bets: usize,
    pub accepted: usize,
    pub volume: Amount,
    pub fees: Amount,
    /// Total permanent PnL, `M * EPP`.
    pub tp: f64,
    pub tp_with_fees: f64,
}

/// Mean and spread of the trial totals.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub trials: usize,
    pub markets_per_trial: usize,
    pub bets: MeanStd,
    pub volume: MeanStd,
    pub tp: MeanStd,
    pub tp_with_fees: MeanStd,
    /// Funding of all markets in one trial.
    pub funding_per_trial: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullReport {
    pub trials: Vec<TrialSummary>,
    pub table: TrialTable,
    /// Every market of every trial.
    pub experiment: Experiment,
}

/// `trials` repetitions of `n_markets` markets. Trial `t` uses market indices
/// `t * n_markets .. (t + 1) * n_markets`.
pub fn run_full_market(cfg: &SimConfig, trials: usize) -> Result<FullReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    let m = cfg.n_markets;
    let indices: Vec<u64> = (0..(trials * m) as u64).collect();
    let runs = run_markets(cfg, &indices)?;
    let mut summaries = Vec::with_capacity(trials);
    for (t, chunk) in runs.chunks(m).enumerate() {
        let stats: Vec<MarketStats> = chunk.iter().map(|r| r.stats.clone()).collect();
        let report = MetricsReport::from_markets(cfg.engine, &stats)?;
        summaries.push(TrialSummary {
            trial: t,
            bets: report.total_bets,
            accepted: report.accepted_bets,
            volume: report.volume,
            fees: report.fee_revenue,
            tp: report.tp,
            tp_with_fees: report.tp + report.fee_revenue.to_f64(),
        });
    }
    let col = |f: &dyn Fn(&TrialSummary) -> f64| -> Result<MeanStd> {
        MeanStd::of(&summaries.iter().map(f).collect::<Vec<_>>())
    };
    let table = TrialTable {
        trials,
        markets_per_trial: m,
        bets: col(&|s| s.bets as f64)?,
        volume: col(&|s| s.volume.to_f64())?,
        tp: col(&|s| s.tp)?,
        tp_with_fees: col(&|s| s.tp_with_fees)?,
        funding_per_trial: cfg.funding.to_f64() * m as f64,
    };
    Ok(FullReport {
        trials: summaries,
        table,
        experiment: experiment(cfg, runs)?,
    })
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    /// Binary true probability `p`, both side modes.
    Probability,
    /// Fixed rejection threshold.
    Rejection,
    /// Bets per market.
    BetCount,
}

impl SweepFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepFamily::Probability => "probs",
            SweepFamily::Rejection => "rejection",
            SweepFamily::BetCount => "n_bets",
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub family: SweepFamily,
    pub x: f64,
    pub side_mode: SideMode,
    pub experiment: Experiment,
}

impl SweepPoint {
    pub fn label(&self) -> String {
        format!("{}={}/{}", self.family.as_str(), self.x, self.side_mode)
    }
}

fn point(family: SweepFamily, x: f64, cfg: SimConfig) -> Result<SweepPoint> {
    Ok(SweepPoint {
        family,
        x,
        side_mode: cfg.side_mode,
        experiment: run_multi_market(&cfg)?,
    })
}

/// Binary markets with `probs = (p, 1 - p)` for each `p`, under both side modes.
pub fn sweep_probabilities(cfg: &SimConfig, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for mode in [SideMode::TrueProb, SideMode::Uniform] {
        for &p in grid {
            let c = SimConfig {
                k: OutcomeCount::Fixed(2),
                probs: ProbSpec::Fixed(vec![p, 1.0 - p]),
                side_mode: mode,
                ..cfg.clone()
            };
            out.push(point(SweepFamily::Probability, p, c)?);
        }
    }
    Ok(out)
}

/// Deterministic thresholds: every bet rejects when its spread exceeds `t`.
pub fn sweep_rejection(cfg: &SimConfig, thresholds: &[f64]) -> Result<Vec<SweepPoint>> {
    thresholds
        .iter()
        .map(|&t| {
            let c = SimConfig {
                rej_mean: t,
                rej_std: 0.0,
                ..cfg.clone()
            };
            point(SweepFamily::Rejection, t, c)
        })
        .collect()
}

pub fn sweep_bet_counts(cfg: &SimConfig, counts: &[usize]) -> Result<Vec<SweepPoint>> {
    counts
        .iter()
        .map(|&n| {
            let c = SimConfig {
                n_bets: BetCount::Fixed(n),
                ..cfg.clone()
            };
            point(SweepFamily::BetCount, n as f64, c)
        })
        .collect()
}

/// All three sweep families on their default grids.
pub fn sweep_all(cfg: &SimConfig) -> Result<Vec<SweepPoint>> {
    let mut out = sweep_probabilities(cfg, &PROB_GRID)?;
    out.extend(sweep_rejection(cfg, &REJECTION_GRID)?);
    out.extend(sweep_bet_counts(cfg, &BET_GRID)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(p: f64, n_bets: usize) -> SimConfig {
        SimConfig {
            seed: 5,
            ..SimConfig::binary(p, n_bets, 4)
        }
    }

    #[test]
    fn zero_bet_market_stays_at_initial_state() {
        let cfg = small(0.5, 1);
        let mut setup = market_setup(&cfg, 0).unwrap();
        setup.n_bets = 0;
        for engine in [EngineKind::Uamm, EngineKind::Cpmm] {
            let run = simulate_market_with(&cfg, &setup, engine).unwrap();
            assert!(run.steps.is_empty());
            assert_eq!(run.initial, run.terminal);
            assert_eq!(run.stats.path.impermanent_pnl(), 0.0);
        }
    }

    #[test]
    fn single_market_is_deterministic_and_conserves() {
        let cfg = small(0.5, 200);
        let a = run_single_market(&cfg, 9).unwrap();
        let b = run_single_market(&cfg, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), 200);
        let accepted = a.steps.iter().filter(|s| s.accepted).count();
        assert_eq!(accepted, a.bets.len());
        let volume: Amount = a.bets.iter().map(|b| b.wager).sum();
        assert_eq!(volume, a.stats.volume);
    }

    #[test]
    fn balances_move_by_wager_minus_payout() {
        let run = run_single_market(&small(0.3, 100), 1).unwrap();
        for k in 1..=2 {
            let expected: Amount = run
                .bets
                .iter()
                .map(|b| if b.outcome == k { b.wager - b.odd } else { b.wager })
                .sum();
            let moved = (run.terminal[0] + run.terminal[k]) - (run.initial[0] + run.initial[k]);
            assert_eq!(moved, expected);
        }
    }

    #[test]
    fn engines_see_identical_bettors() {
        let cfg = small(0.7, 80);
        let setup = market_setup(&cfg, 3).unwrap();
        let u = simulate_market_with(&cfg, &setup, EngineKind::Uamm).unwrap();
        let c = simulate_market_with(&cfg, &setup, EngineKind::Cpmm).unwrap();
        assert_eq!(u.winner, c.winner);
        for (a, b) in u.steps.iter().zip(&c.steps) {
            assert_eq!((a.wager, a.outcome, a.threshold), (b.wager, b.outcome, b.threshold));
        }
    }

    #[test]
    fn full_setup_respects_ranges() {
        let cfg = SimConfig::default();
        for i in 0..200 {
            let s = market_setup(&cfg, i).unwrap();
            assert!((2..=3).contains(&s.outcomes()));
            assert!((BET_COUNT_MIN..=BET_COUNT_MAX).contains(&s.n_bets));
            let f = s.fair.to_f64_vec();
            if f.len() == 2 {
                assert!(f[0] > 0.2 - 1e-6 && f[0] < 0.8 + 1e-6);
            }
        }
    }

    #[test]
    fn degenerate_full_run_equals_single_run() {
        let cfg = SimConfig {
            n_markets: 1,
            ..small(0.6, 50)
        };
        let full = run_full_market(&cfg, 1).unwrap();
        let single = run_single_market(&cfg, cfg.seed).unwrap();
        assert_eq!(full.experiment.runs[0], single);
        assert_eq!(full.trials[0].bets, 50);
    }

    #[test]
    fn market_order_does_not_change_aggregates() {
        let cfg = small(0.5, 30);
        let fwd = run_markets(&cfg, &[0, 1, 2, 3, 4, 5]).unwrap();
        let rev = run_markets(&cfg, &[5, 4, 3, 2, 1, 0]).unwrap();
        let stats = |r: &[MarketRun]| r.iter().map(|m| m.stats.clone()).collect::<Vec<_>>();
        let a = MetricsReport::from_markets(EngineKind::Uamm, &stats(&fwd)).unwrap();
        let b = MetricsReport::from_markets(EngineKind::Uamm, &stats(&rev)).unwrap();
        assert_eq!((a.eip, a.epp, a.tp, a.volume), (b.eip, b.epp, b.tp, b.volume));
        assert_eq!(fwd[0], rev[5]);
    }

    #[test]
    fn sweep_shapes() {
        let cfg = SimConfig {
            n_markets: 2,
            ..small(0.5, 5)
        };
        let probs = sweep_probabilities(&cfg, &[0.2, 0.5]).unwrap();
        assert_eq!(probs.len(), 4);
        assert_eq!(probs[0].side_mode, SideMode::TrueProb);
        assert_eq!(probs[3].side_mode, SideMode::Uniform);
        let rej = sweep_rejection(&cfg, &[0.025, 1.0]).unwrap();
        assert_eq!(rej[1].experiment.report.rejection_rate, 0.0);
    }
}
