//! Bettor behaviour: wager size, side and odds rejection.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::sim::config::{SideMode, SimConfig};

/// Smallest wager, one cent.
pub const MIN_WAGER: Amount = Amount::from_micros(10_000);

/// Log-normal wager sizes in collateral units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WagerModel {
    pub mu: f64,
    pub sigma: f64,
}

/// Normal rejection threshold on the quoted implied-probability spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionModel {
    pub mean: f64,
    pub std: f64,
}

/// Everything drawn for one bet attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BettorDraw {
    pub wager: Amount,
    /// 1-based outcome.
    pub side: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl WagerModel {
    pub fn from_config(cfg: &SimConfig) -> Self {
        WagerModel {
            mu: cfg.wager_mu,
            sigma: cfg.wager_sigma,
        }
    }
}

impl RejectionModel {
    pub fn from_config(cfg: &SimConfig) -> Self {
        RejectionModel {
            mean: cfg.rej_mean,
            std: cfg.rej_std,
        }
    }

    pub fn draw_threshold<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let normal =
            Normal::new(self.mean, self.std).map_err(|e| Error::InvalidConfig(format!("rejection model: {e}")))?;
        Ok(normal.sample(rng))
    }
}

/// A wager rounded to the cent, at least [`MIN_WAGER`].
pub fn draw_wager<R: Rng + ?Sized>(rng: &mut R, model: &WagerModel) -> Result<Amount> {
    let dist = LogNormal::new(model.mu, model.sigma).map_err(|e| Error::InvalidConfig(format!("wager model: {e}")))?;
    let cents = (dist.sample(rng) * 100.0).round();
    let cents = if cents.is_finite() { cents.max(1.0) as i128 } else { 1 };
    Ok(Amount::from_micros(cents * MIN_WAGER.micros()).max(MIN_WAGER))
}

/// Outcome a bettor backs.
pub fn draw_side<R: Rng + ?Sized>(rng: &mut R, mode: SideMode, fair: &[f64]) -> Result<usize> {
    match mode {
        SideMode::Uniform => Ok(rng.random_range(1..=fair.len())),
        SideMode::TrueProb => {
            let dist =
                WeightedIndex::new(fair).map_err(|e| Error::InvalidPrices(format!("cannot sample sides: {e}")))?;
            Ok(dist.sample(rng) + 1)
        }
    }
}

/// Draws wager, side and threshold, always in that order.
pub fn draw_bettor<R: Rng + ?Sized>(rng: &mut R, cfg: &SimConfig, fair: &[f64]) -> Result<BettorDraw> {
    let wager = draw_wager(rng, &WagerModel::from_config(cfg))?;
    let side = draw_side(rng, cfg.side_mode, fair)?;
    let threshold = RejectionModel::from_config(cfg).draw_threshold(rng)?;
    Ok(BettorDraw { wager, side, threshold })
}

/// Rejects when the quoted spread exceeds the bettor's threshold.
pub fn decide_rejection(slippage: f64, threshold: f64) -> Decision {
    if slippage > threshold {
        Decision::Reject
    } else {
        Decision::Accept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{substream, Stream};

    fn rng() -> rand_chacha::ChaCha8Rng {
        substream(11, 0, Stream::Bettors)
    }

    #[test]
    fn default_wager_mean_is_near_45() {
        let model = WagerModel { mu: 3.2, sigma: 1.2 };
        let mut r = rng();
        let n = 100_000;
        let total: f64 = (0..n).map(|_| draw_wager(&mut r, &model).unwrap().to_f64()).sum();
        let mean = total / n as f64;
        // Population mean exp(3.2 + 1.2^2 / 2) = 50.4.
        assert!((mean - 50.4).abs() / 50.4 < 0.03, "{mean}");
        assert!((mean - 45.0).abs() / 45.0 < 0.15, "{mean}");
    }

    #[test]
    fn zero_sigma_wager_is_constant() {
        let model = WagerModel { mu: 3.2, sigma: 0.0 };
        let mut r = rng();
        let expected = Amount::from_f64_rounded((3.2f64.exp() * 100.0).round() / 100.0).unwrap();
        for _ in 0..10 {
            assert_eq!(draw_wager(&mut r, &model).unwrap(), expected);
        }
    }

    #[test]
    fn wagers_are_whole_cents() {
        let model = WagerModel { mu: 0.0, sigma: 3.0 };
        let mut r = rng();
        for _ in 0..1000 {
            let w = draw_wager(&mut r, &model).unwrap();
            assert!(w >= MIN_WAGER);
            assert_eq!(w.micros() % MIN_WAGER.micros(), 0);
        }
    }

    #[test]
    fn side_frequencies_follow_mode() {
        let n = 10_000;
        let mut r = rng();
        let count = |r: &mut rand_chacha::ChaCha8Rng, mode, fair: &[f64], k: usize| {
            (0..n).filter(|_| draw_side(r, mode, fair).unwrap() == k).count() as f64 / n as f64
        };
        assert!((count(&mut r, SideMode::Uniform, &[0.8, 0.2], 1) - 0.5).abs() < 0.02);
        assert!((count(&mut r, SideMode::TrueProb, &[0.8, 0.2], 1) - 0.8).abs() < 0.02);
        let fair = [0.7, 0.2, 0.1];
        for (k, p) in fair.iter().enumerate() {
            assert!((count(&mut r, SideMode::TrueProb, &fair, k + 1) - p).abs() < 0.02);
        }
    }

    #[test]
    fn zero_slippage_acceptance_matches_normal_cdf() {
        let model = RejectionModel { mean: 0.045, std: 0.05 };
        let mut r = rng();
        let n = 100_000;
        let accepted = (0..n)
            .filter(|_| decide_rejection(0.0, model.draw_threshold(&mut r).unwrap()) == Decision::Accept)
            .count() as f64
            / n as f64;
        // Phi(0.9) = 0.8159
        assert!((accepted - 0.8159).abs() < 0.005, "{accepted}");
    }

    #[test]
    fn threshold_one_accepts_any_spread() {
        for s in [-0.5, 0.0, 0.3, 0.999, 1.0] {
            assert_eq!(decide_rejection(s, 1.0), Decision::Accept);
        }
        assert_eq!(decide_rejection(0.05, 0.045), Decision::Reject);
    }

    #[test]
    fn draws_replay() {
        let cfg = SimConfig::default();
        let a: Vec<BettorDraw> = {
            let mut r = rng();
            (0..50)
                .map(|_| draw_bettor(&mut r, &cfg, &[0.3, 0.7]).unwrap())
                .collect()
        };
        let mut r = rng();
        let b: Vec<BettorDraw> = (0..50)
            .map(|_| draw_bettor(&mut r, &cfg, &[0.3, 0.7]).unwrap())
            .collect();
        assert_eq!(a, b);
    }
}
