//! Externally supplied outcome probabilities.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest tolerated deviation of a float probability vector from summing to one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Fair outcome prices `f_1..f_K`, each in `(0, 1)`, summing to one.
///
/// Outcomes are addressed 1-based everywhere in this crate, matching the
/// token layout where index 0 is the collateral.
#[derive(Debug, Clone, PartialEq)]
pub struct FairPrices<T> {
    probs: Vec<T>,
}

impl<T: Scalar> FairPrices<T> {
    /// Validates a float vector and converts it, then forces the last entry to
    /// `1 - sum(rest)` so the sum is one in `T` arithmetic.
    pub fn from_f64(probs: &[f64]) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPrices(format!(
                "need at least 2 outcomes, got {}",
                probs.len()
            )));
        }
        for (idx, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidPrices(format!(
                    "price of outcome {} is {p}, expected a value in (0, 1)",
                    idx + 1
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidPrices(format!("prices sum to {sum}, expected 1")));
        }
        Self::renormalized(probs)
    }

    /// Scales positive weights to a probability vector.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        if weights.len() < 2 || weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidPrices(format!(
                "weights must be >= 2 positive finite values, got {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::renormalized(&probs)
    }

    fn renormalized(probs: &[f64]) -> Result<Self> {
        let (last, head) = probs.split_last().expect("len checked");
        let mut out: Vec<T> = head.iter().map(|&p| T::from_f64_lossy(p)).collect();
        let head_sum = out.iter().fold(T::zero(), |acc, &p| acc + p);
        let tail = T::one() - head_sum;
        if !(tail > T::zero() && tail < T::one()) || out.iter().any(|p| *p <= T::zero()) {
            return Err(Error::InvalidPrices(format!(
                "prices {probs:?} (last {last}) do not survive conversion"
            )));
        }
        out.push(tail);
        Ok(FairPrices { probs: out })
    }

    pub fn outcomes(&self) -> usize {
        self.probs.len()
    }

    /// Fair price of a 1-based outcome.
    pub fn get(&self, outcome: usize) -> T {
        self.probs[outcome - 1]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn check_outcome(&self, outcome: usize) -> Result<()> {
        if outcome == 0 || outcome > self.probs.len() {
            return Err(Error::UnknownOutcome {
                outcome,
                outcomes: self.probs.len(),
            });
        }
        Ok(())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.as_f64()).collect()
    }

    /// Re-expresses the prices in another scalar type.
    pub fn convert<U: Scalar>(&self) -> FairPrices<U> {
        FairPrices::<U>::renormalized(&self.to_f64_vec()).expect("valid prices stay valid under conversion")
    }
}
