//! Six-decimal fixed-point amounts.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

use crate::error::Error;

/// Number of fractional decimal digits carried by an [`Amount`].
pub const DECIMALS: u32 = 6;

/// `10^DECIMALS`, the number of micro-units in one whole unit.
pub const SCALE: i128 = 1_000_000;

/// A signed decimal amount stored as an integer count of micro-units.
///
/// Addition and subtraction are exact. Multiplication and division go through
/// an `i128` intermediate and truncate toward zero, which is the only place
/// rounding can happen.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(i128);

impl Amount {
    pub const ZERO: Amount = Amount(0);
    pub const ONE: Amount = Amount(SCALE);
    /// Smallest positive amount.
    pub const EPSILON: Amount = Amount(1);

    pub const fn from_micros(micros: i128) -> Self {
        Amount(micros)
    }

    pub const fn micros(self) -> i128 {
        self.0
    }

    pub const fn from_units(units: i64) -> Self {
        Amount(units as i128 * SCALE)
    }

    /// Rounds to the nearest micro-unit; ties away from zero.
    pub fn from_f64_rounded(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let scaled = (value * SCALE as f64).round();
        if scaled.abs() >= i128::MAX as f64 {
            return None;
        }
        Some(Amount(scaled as i128))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        self.0.checked_add(rhs.0).map(Amount)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    /// Product rounded up to the next micro-unit when it is not exact.
    pub fn mul_ceil(self, rhs: Self) -> Self {
        let raw = self.0 * rhs.0;
        let q = raw.div_euclid(SCALE);
        if raw.rem_euclid(SCALE) == 0 {
            Amount(q)
        } else {
            Amount(q + 1)
        }
    }

    /// `Some(product)` only when the product has no digits past the sixth decimal.
    pub fn mul_exact(self, rhs: Self) -> Option<Self> {
        let raw = self.0.checked_mul(rhs.0)?;
        (raw % SCALE == 0).then_some(Amount(raw / SCALE))
    }

    pub fn abs(self) -> Self {
        Amount(self.0.abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = SCALE as u128;
        write!(f, "{sign}{}.{:06}", abs / scale, abs % scale)
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Amount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("invalid amount `{s}`"));
        let trimmed = s.trim();
        let (negative, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if (whole.is_empty() && frac.is_empty())
            || frac.len() > DECIMALS as usize
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: i128 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let mut frac_micros: i128 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        for _ in frac.len()..DECIMALS as usize {
            frac_micros *= 10;
        }
        let micros = whole
            .checked_mul(SCALE)
            .and_then(|w| w.checked_add(frac_micros))
            .ok_or_else(bad)?;
        Ok(Amount(if negative { -micros } else { micros }))
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Self) -> Self {
        Amount(self.0 + rhs.0)
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Self) -> Self {
        Amount(self.0 - rhs.0)
    }
}

impl Mul for Amount {
    type Output = Amount;
    fn mul(self, rhs: Self) -> Self {
        Amount(self.0 * rhs.0 / SCALE)
    }
}

impl Div for Amount {
    type Output = Amount;
    fn div(self, rhs: Self) -> Self {
        Amount(self.0 * SCALE / rhs.0)
    }
}

impl Rem for Amount {
    type Output = Amount;
    fn rem(self, rhs: Self) -> Self {
        Amount(self.0 % rhs.0)
    }
}

impl Neg for Amount {
    type Output = Amount;
    fn neg(self) -> Self {
        Amount(-self.0)
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Amount {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Self {
        iter.fold(Amount::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Amount> for Amount {
    fn sum<I: Iterator<Item = &'a Amount>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

impl Zero for Amount {
    fn zero() -> Self {
        Amount::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Amount {
    fn one() -> Self {
        Amount::ONE
    }
}

impl Num for Amount {
    type FromStrRadixErr = Error;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(Error::Parse(format!("unsupported radix {radix}")));
        }
        s.parse()
    }
}

impl FromPrimitive for Amount {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Amount::from_units(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        (n as i128).checked_mul(SCALE).map(Amount)
    }
    fn from_f64(n: f64) -> Option<Self> {
        Amount::from_f64_rounded(n)
    }
}

impl ToPrimitive for Amount {
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(self.0 / SCALE).ok()
    }
    fn to_u64(&self) -> Option<u64> {
        u64::try_from(self.0 / SCALE).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(Amount::to_f64(*self))
    }
}
