//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # full uncontrolled experiment
//! k = 2-3
//! funding = 10000
//! probs = uniform:0.2:0.8
//! n_bets = lognormal:2:1
//! n_markets = 100
//! ```
//!
//! Keys not present keep their defaults (the full experiment). Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::amount::Amount;
use crate::engine::EngineKind;
use crate::error::{Error, Result};
use crate::fair::{FairPrices, SUM_TOLERANCE};

/// Every recognised configuration key, in canonical order.
pub const KEYS: [&str; 13] = [
    "k",
    "funding",
    "probs",
    "n_bets",
    "n_markets",
    "wager_mu",
    "wager_sigma",
    "side_mode",
    "rej_mean",
    "rej_std",
    "fee_rate",
    "seed",
    "engine",
];

/// Bounds applied to sampled per-market bet counts.
pub const BET_COUNT_MIN: usize = 1;
pub const BET_COUNT_MAX: usize = 40;

/// Number of outcomes per market: fixed, or uniform over an inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeCount {
    Fixed(usize),
    Range { min: usize, max: usize },
}

/// True outcome probabilities: fixed, or sampled per market.
///
/// Sampled binary markets draw `p ~ U(low, high)` and use `(p, 1 - p)`;
/// larger markets draw one weight per outcome from `U(low, high)` and normalise.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbSpec {
    Fixed(Vec<f64>),
    Uniform { low: f64, high: f64 },
}

/// Bets per market: fixed, or `round(exp(N(mu, sigma)))` clamped to
/// `BET_COUNT_MIN..=BET_COUNT_MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetCount {
    Fixed(usize),
    LogNormal { mu: f64, sigma: f64 },
}

/// How bettors choose the outcome they back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SideMode {
    /// Outcome drawn from the true probabilities.
    TrueProb,
    /// Every outcome equally likely.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub k: OutcomeCount,
    /// LP funding per market.
    pub funding: Amount,
    pub probs: ProbSpec,
    pub n_bets: BetCount,
    pub n_markets: usize,
    /// Log-space mean of the wager distribution.
    pub wager_mu: f64,
    /// Log-space standard deviation of the wager distribution.
    pub wager_sigma: f64,
    pub side_mode: SideMode,
    /// Mean of the per-bet rejection threshold.
    pub rej_mean: f64,
    /// Standard deviation of the per-bet rejection threshold.
    pub rej_std: f64,
    pub fee_rate: Amount,
    pub seed: u64,
    pub engine: EngineKind,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            k: OutcomeCount::Range { min: 2, max: 3 },
            funding: Amount::from_units(10_000),
            probs: ProbSpec::Uniform { low: 0.2, high: 0.8 },
            n_bets: BetCount::LogNormal { mu: 2.0, sigma: 1.0 },
            n_markets: 100,
            wager_mu: 3.2,
            wager_sigma: 1.2,
            side_mode: SideMode::TrueProb,
            rej_mean: 0.045,
            rej_std: 0.05,
            fee_rate: Amount::from_micros(25_000),
            seed: 0,
            engine: EngineKind::Uamm,
        }
    }
}

impl SimConfig {
    /// A controlled binary market with fixed probabilities and bet count.
    pub fn binary(p: f64, n_bets: usize, n_markets: usize) -> Self {
        SimConfig {
            k: OutcomeCount::Fixed(2),
            probs: ProbSpec::Fixed(vec![p, 1.0 - p]),
            n_bets: BetCount::Fixed(n_bets),
            n_markets,
            ..SimConfig::default()
        }
    }

    /// Parses a config file body, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        let mut seen = BTreeSet::new();
        let mut unknown = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                unknown.push(key.to_string());
                continue;
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidConfig(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value)?;
        }
        if !unknown.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "unknown keys: {} (expected one of: {})",
                unknown.join(", "),
                KEYS.join(", ")
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value. Does not validate cross-key constraints.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: Error| Error::InvalidConfig(format!("`{key}`: {e}"));
        match key {
            "k" => self.k = value.parse().map_err(bad)?,
            "funding" => self.funding = value.parse().map_err(bad)?,
            "probs" => self.probs = value.parse().map_err(bad)?,
            "n_bets" => self.n_bets = value.parse().map_err(bad)?,
            "n_markets" => self.n_markets = parse_num(value).map_err(bad)?,
            "wager_mu" => self.wager_mu = parse_num(value).map_err(bad)?,
            "wager_sigma" => self.wager_sigma = parse_num(value).map_err(bad)?,
            "side_mode" => self.side_mode = value.parse().map_err(bad)?,
            "rej_mean" => self.rej_mean = parse_num(value).map_err(bad)?,
            "rej_std" => self.rej_std = parse_num(value).map_err(bad)?,
            "fee_rate" => self.fee_rate = value.parse().map_err(bad)?,
            "seed" => self.seed = parse_num(value).map_err(bad)?,
            "engine" => self.engine = value.parse().map_err(bad)?,
            other => return Err(Error::InvalidConfig(format!("unknown keys: {other}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let (kmin, kmax) = match self.k {
            OutcomeCount::Fixed(k) => (k, k),
            OutcomeCount::Range { min, max } => (min, max),
        };
        if kmin < 2 || kmax < kmin {
            return fail(format!("`k`: need 2 <= min <= max, got {}", self.k));
        }
        if self.funding <= Amount::ZERO {
            return fail(format!("`funding` must be positive, got {}", self.funding));
        }
        match &self.probs {
            ProbSpec::Fixed(p) => {
                if kmin != kmax || p.len() != kmin {
                    return fail(format!("`probs` lists {} values but `k` is {}", p.len(), self.k));
                }
                FairPrices::<Amount>::from_f64(p).map_err(|e| Error::InvalidConfig(format!("`probs`: {e}")))?;
            }
            ProbSpec::Uniform { low, high } => {
                if !(*low > 0.0 && low <= high && *high < 1.0) {
                    return fail(format!("`probs`: need 0 < low <= high < 1, got {low}..{high}"));
                }
            }
        }
        match self.n_bets {
            BetCount::Fixed(n) if n < 1 => return fail("`n_bets` must be at least 1".into()),
            BetCount::LogNormal { mu, sigma } if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) => {
                return fail(format!("`n_bets`: invalid log-normal ({mu}, {sigma})"))
            }
            _ => {}
        }
        if self.n_markets < 1 {
            return fail("`n_markets` must be at least 1".into());
        }
        if !(self.wager_mu.is_finite() && self.wager_sigma.is_finite() && self.wager_sigma >= 0.0) {
            return fail(format!(
                "wager distribution needs finite `wager_mu` and `wager_sigma` >= 0, got ({}, {})",
                self.wager_mu, self.wager_sigma
            ));
        }
        if !(self.rej_mean.is_finite() && self.rej_std.is_finite() && self.rej_std >= 0.0) {
            return fail(format!(
                "rejection model needs finite `rej_mean` and `rej_std` >= 0, got ({}, {})",
                self.rej_mean, self.rej_std
            ));
        }
        if self.fee_rate.is_negative() || self.fee_rate >= Amount::ONE {
            return fail(format!("`fee_rate` must be in [0, 1), got {}", self.fee_rate));
        }
        Ok(())
    }

    /// Canonical file body; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let values = [
            self.k.to_string(),
            self.funding.to_string(),
            self.probs.to_string(),
            self.n_bets.to_string(),
            self.n_markets.to_string(),
            self.wager_mu.to_string(),
            self.wager_sigma.to_string(),
            self.side_mode.to_string(),
            self.rej_mean.to_string(),
            self.rej_std.to_string(),
            self.fee_rate.to_string(),
            self.seed.to_string(),
            self.engine.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a valid number")))
}

impl fmt::Display for OutcomeCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeCount::Fixed(k) => write!(f, "{k}"),
            OutcomeCount::Range { min, max } => write!(f, "{min}-{max}"),
        }
    }
}

impl FromStr for OutcomeCount {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('-') {
            Some((a, b)) => Ok(OutcomeCount::Range {
                min: parse_num(a.trim())?,
                max: parse_num(b.trim())?,
            }),
            None => Ok(OutcomeCount::Fixed(parse_num(s)?)),
        }
    }
}

impl fmt::Display for ProbSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbSpec::Fixed(p) => {
                let parts: Vec<String> = p.iter().map(f64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
            ProbSpec::Uniform { low, high } => write!(f, "uniform:{low}:{high}"),
        }
    }
}

impl FromStr for ProbSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("uniform:") {
            let (low, high) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `uniform:LOW:HIGH`, got `{s}`")))?;
            return Ok(ProbSpec::Uniform {
                low: parse_num(low.trim())?,
                high: parse_num(high.trim())?,
            });
        }
        let p = s
            .split(',')
            .map(|v| parse_num(v.trim()))
            .collect::<Result<Vec<f64>>>()?;
        if (p.iter().sum::<f64>() - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Parse(format!("probabilities `{s}` do not sum to 1")));
        }
        Ok(ProbSpec::Fixed(p))
    }
}

impl fmt::Display for BetCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetCount::Fixed(n) => write!(f, "{n}"),
            BetCount::LogNormal { mu, sigma } => write!(f, "lognormal:{mu}:{sigma}"),
        }
    }
}

impl FromStr for BetCount {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("lognormal:") {
            let (mu, sigma) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `lognormal:MU:SIGMA`, got `{s}`")))?;
            return Ok(BetCount::LogNormal {
                mu: parse_num(mu.trim())?,
                sigma: parse_num(sigma.trim())?,
            });
        }
        Ok(BetCount::Fixed(parse_num(s)?))
    }
}

impl SideMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SideMode::TrueProb => "true-prob",
            SideMode::Uniform => "uniform",
        }
    }
}

impl fmt::Display for SideMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SideMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true-prob" => Ok(SideMode::TrueProb),
            "uniform" => Ok(SideMode::Uniform),
            other => Err(Error::Parse(format!("unknown side mode `{other}` (true-prob|uniform)"))),
        }
    }
}
