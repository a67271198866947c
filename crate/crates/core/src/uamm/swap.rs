//! The piecewise swap curve.
//!
//! A swap of `d_in` units of token `In` for token `Out` first converts at the
//! fair rate `rho = f_in / f_out`, giving `delta = rho * d_in`, and then
//! applies slippage only when the output reserve `R` sits at or below the
//! target balance `TB`. With the virtual reserve `X = TB^2 / R`:
//!
//! * transition, `R - delta <= TB <= R`:
//!   `alpha * delta + (rho - alpha) * (R - TB)` with `alpha = R / (X + delta)`
//! * surplus, `TB <= R` otherwise: `delta`
//! * deficit, `TB > R`: `R - TB^2 / (X + delta)`
//!
//! Branches are tested in that order. Both slipped branches are evaluated via
//! the identity `R / (X + delta) = R^2 / (TB^2 + R * delta)`, which avoids the
//! cancellation in `R - TB^2 / (X + delta)` and keeps fixed-point truncation
//! to a single division.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapBranch {
    /// Output reserve straddles the target balance.
    Transition,
    /// Output reserve above target: fair exchange, no slippage.
    Surplus,
    /// Output reserve below target: constant-product slippage.
    Deficit,
}

impl SwapBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            SwapBranch::Transition => "transition",
            SwapBranch::Surplus => "surplus",
            SwapBranch::Deficit => "deficit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapResult<T> {
    pub amount_out: T,
    pub branch: SwapBranch,
}

/// Pool-side inputs of a single swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapCurve<T> {
    /// Balance of the output token `R_out`.
    pub reserve_out: T,
    /// Target balance `TB`.
    pub target: T,
    /// Fair price of the input token.
    pub price_in: T,
    /// Fair price of the output token.
    pub price_out: T,
}

impl<T: Scalar> SwapCurve<T> {
    pub fn new(reserve_out: T, target: T, price_in: T, price_out: T) -> Self {
        SwapCurve {
            reserve_out,
            target,
            price_in,
            price_out,
        }
    }

    /// Fair exchange rate `f_in / f_out`.
    pub fn rate(&self) -> T {
        self.price_in / self.price_out
    }

    /// Fair-rate output before slippage.
    pub fn fair_output(&self, input: T) -> T {
        input * self.price_in / self.price_out
    }

    /// `X = TB^2 / R_out`, the reserve that puts the pool on `X * R = TB^2`.
    pub fn virtual_reserve(&self) -> T {
        self.target * self.target / self.reserve_out
    }

    pub fn branch(&self, input: T) -> SwapBranch {
        let delta = self.fair_output(input);
        let (r, tb) = (self.reserve_out, self.target);
        if r - delta <= tb && tb <= r {
            SwapBranch::Transition
        } else if tb <= r {
            SwapBranch::Surplus
        } else {
            SwapBranch::Deficit
        }
    }

    /// Output of swapping `input` units of the input token.
    pub fn swap(&self, input: T) -> Result<SwapResult<T>> {
        if input.is_negative() {
            return Err(Error::NegativeAmount(format!("{input:?}")));
        }
        if self.reserve_out.is_negative() || self.target.is_negative() {
            return Err(Error::NegativeAmount(format!(
                "reserve {:?} / target {:?}",
                self.reserve_out, self.target
            )));
        }
        let branch = self.branch(input);
        if input.is_zero() || self.reserve_out.is_zero() {
            return Ok(SwapResult {
                amount_out: T::zero(),
                branch,
            });
        }
        let r = self.reserve_out;
        let tb = self.target;
        let delta = self.fair_output(input);
        let amount_out = match branch {
            SwapBranch::Transition => {
                // alpha * delta + (rho - alpha) * (R - TB)
                let excess = r - tb;
                let denom = tb * tb + r * delta;
                r * r * (delta - excess) / denom + excess * self.price_in / self.price_out
            }
            SwapBranch::Surplus => delta,
            SwapBranch::Deficit => r * r * delta / (tb * tb + r * delta),
        };
        Ok(SwapResult { amount_out, branch })
    }
}
