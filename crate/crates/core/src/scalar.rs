//! Scalar abstraction shared by the pricing kernels.
//!
//! Every pool and metric computation is written once against [`Scalar`] and
//! instantiated with `f64` for statistics, with [`Amount`](crate::Amount) for
//! exact ledger accounting, and with exact rationals in tests.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type usable by the pricing and accounting kernels.
///
/// Only field operations and ordering are required; nothing here needs
/// `sqrt`, `exp` or any other transcendental.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64`. Panics on non-finite input.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(|| panic!("{value} is not representable"))
    }

    /// Lossy conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("usize fits scalar")
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn is_negative(self) -> bool {
        self < Self::zero()
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_max_follow_partial_order() {
        assert_eq!(3.0f64.min_of(2.0), 2.0);
        assert_eq!(3.0f64.max_of(2.0), 3.0);
        assert_eq!(2i64.min_of(5), 2);
    }

    #[test]
    fn relative_error_is_symmetric_and_zero_safe() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 2.0), relative_error(2.0, 1.0));
        assert!((relative_error(100.0, 101.0) - 1.0 / 101.0).abs() < 1e-15);
    }
}
