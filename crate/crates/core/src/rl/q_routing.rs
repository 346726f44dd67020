use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RlError;
use crate::tables::{prob_from_q, ProbRow, QTable};
use crate::topology::RouterId;

/// Arithmetic needed by [`q_update`], so the rule can run on exact
/// rationals as well as on `f64`.
pub trait QValue: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
}

impl QValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
}

/// `q + eta * ((neighbor_best + zeta) - q)`.
///
/// `neighbor_best` is the next router's best delivery estimate for the same
/// destination and `zeta` the queueing plus transmission time just spent.
pub fn q_update<T: QValue>(q: T, neighbor_best: T, zeta: T, eta: T) -> Result<T, RlError> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(RlError::StepSize);
    }
    if q < T::zero() || neighbor_best < T::zero() || zeta < T::zero() {
        return Err(RlError::NegativeInput);
    }
    Ok(q + eta * ((neighbor_best + zeta) - q))
}

/// How Q-routing turns estimates into a forwarding choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QVariant {
    /// Always the interface with the best (lowest) estimate.
    #[default]
    Argmax,
    /// Probabilities in proportion to preference weights `1 / (1 + Q)`.
    Ratio,
}

impl FromStr for QVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "argmax" => Ok(QVariant::Argmax),
            "ratio" => Ok(QVariant::Ratio),
            _ => Err(format!("unknown q-routing variant `{s}`")),
        }
    }
}

/// Probability row implied by the Q estimates of `x` towards `d`.
pub fn q_forward_row(q: &QTable, x: RouterId, d: RouterId, variant: QVariant) -> ProbRow {
    let row = q.row(x, d);
    match variant {
        QVariant::Argmax => ProbRow::one_hot(row.len(), q.best_interface(x, d)),
        QVariant::Ratio => {
            let prefs: Vec<f64> = row.iter().map(|v| 1.0 / (1.0 + v.max(0.0))).collect();
            prob_from_q(&prefs).expect("preference weights are positive")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate, GeneratorSpec};

    #[test]
    fn hand_evaluated_update() {
        assert_eq!(q_update(10.0, 6.0, 2.0, 0.5).unwrap(), 9.0);
        assert_eq!(q_update(123.0, 6.0, 2.0, 1.0).unwrap(), 8.0);
        assert_eq!(q_update(8.0, 6.0, 2.0, 0.3).unwrap(), 8.0);
    }

    #[test]
    fn step_size_bounds() {
        assert_eq!(q_update(1.0, 1.0, 1.0, 0.0), Err(RlError::StepSize));
        assert_eq!(q_update(1.0, 1.0, 1.0, 1.5), Err(RlError::StepSize));
        assert_eq!(q_update(-1.0, 1.0, 1.0, 0.5), Err(RlError::NegativeInput));
    }

    #[test]
    fn forward_rows() {
        let t = generate(&GeneratorSpec::Complete(3)).unwrap();
        let mut q = QTable::new(&t, 0.0);
        q.set(RouterId(0), RouterId(1), 0, 4.0);
        q.set(RouterId(0), RouterId(1), 1, 1.0);
        assert_eq!(q_forward_row(&q, RouterId(0), RouterId(1), QVariant::Argmax).as_slice(), &[0.0, 1.0]);
        let ratio = q_forward_row(&q, RouterId(0), RouterId(1), QVariant::Ratio);
        // weights 1/5 and 1/2
        assert!((ratio.get(1) - 0.5 / 0.7).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn contraction_towards_target(q in 0.0f64..1e3, nb in 0.0f64..1e3, z in 0.0f64..1e2, eta in 0.001f64..=1.0) {
            let target = nb + z;
            let new = q_update(q, nb, z, eta).unwrap();
            let lhs = (new - target).abs();
            let rhs = (1.0 - eta) * (q - target).abs();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + target.abs() + q.abs()));
        }
    }
}
