//! Exact link and path costs.
//!
//! Costs are nonnegative rationals with a fixed denominator of [`Cost::SCALE`],
//! stored as integers so that path sums compare exactly.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cost(u64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostParseError {
    #[error("negative cost `{0}`")]
    Negative(String),
    #[error("invalid cost `{0}`")]
    Invalid(String),
    #[error("cost `{0}` has more than 3 fractional digits")]
    TooPrecise(String),
}

impl Cost {
    /// Number of units per whole cost unit.
    pub const SCALE: u64 = 1000;
    pub const ZERO: Cost = Cost(0);

    pub const fn from_units(units: u64) -> Self {
        Cost(units)
    }

    pub const fn from_int(whole: u64) -> Self {
        Cost(whole * Self::SCALE)
    }

    pub const fn units(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE as f64
    }

    pub fn saturating_add(self, other: Cost) -> Cost {
        Cost(self.0.saturating_add(other.0))
    }

    /// Returns `None` if the value is not an exact multiple of `1/SCALE`.
    pub fn from_f64(value: f64) -> Option<Cost> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        let scaled = value * Self::SCALE as f64;
        let rounded = scaled.round();
        ((scaled - rounded).abs() < 1e-6).then_some(Cost(rounded as u64))
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, rhs: Cost) -> Cost {
        Cost(self.0 - rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / Self::SCALE;
        let frac = self.0 % Self::SCALE;
        if frac == 0 {
            write!(f, "{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl FromStr for Cost {
    type Err = CostParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.starts_with('-') {
            return Err(CostParseError::Negative(s.to_string()));
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if whole.is_empty() || !all_digits(whole) || !all_digits(frac) {
            return Err(CostParseError::Invalid(s.to_string()));
        }
        if frac.len() > 3 {
            return Err(CostParseError::TooPrecise(s.to_string()));
        }
        let whole: u64 = whole
            .parse()
            .map_err(|_| CostParseError::Invalid(s.to_string()))?;
        let mut frac_units = 0u64;
        for (i, b) in frac.bytes().enumerate() {
            frac_units += u64::from(b - b'0') * 10u64.pow(2 - i as u32);
        }
        whole
            .checked_mul(Self::SCALE)
            .and_then(|w| w.checked_add(frac_units))
            .map(Cost)
            .ok_or_else(|| CostParseError::Invalid(s.to_string()))
    }
}
