//! The truncated cosine bump and its powers.
//!
//! `H(x)` is `cos x` on `[-pi/2, pi/2]` and `0` outside. Its `M`-th power
//! `H^M` is a compactly supported `C^{M-1}` function; these powers are the
//! building blocks for every function this crate integrates.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

/// Order `M >= 1` of the bump power `H^M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BumpOrder(u32);

impl BumpOrder {
    pub fn new(order: u32) -> Result<Self> {
        if order < 1 {
            return Err(Error::OrderTooSmall { min: 1, got: order });
        }
        Ok(Self(order))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `H^M(x)`: `cos^M x` for `|x| <= pi/2`, `0` outside. Values lie in `[0, 1]`.
    pub fn eval(self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite { name: "x" });
        }
        Ok(eval_power(self.0, x))
    }

    /// `(H^M)'(x) = -M cos^{M-1}(x) sin(x)` inside the support, `0` outside.
    ///
    /// At `|x| = pi/2` the outside value `0` is returned. For `M >= 2` the
    /// inside limit is also `0`, so the derivative is continuous there; for
    /// `M = 1` the derivative jumps and the choice never affects an integral.
    pub fn deriv(self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite { name: "x" });
        }
        Ok(deriv_power(self.0, x))
    }
}

impl fmt::Display for BumpOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `H^m` with `m = 0` allowed: `H^0` is the indicator of the *closed*
/// interval `[-pi/2, pi/2]`, so evaluations stay bounded by 1. The endpoint
/// value never matters under an integral.
pub(crate) fn eval_power(m: u32, x: f64) -> f64 {
    let ax = x.abs();
    if m == 0 {
        if ax <= FRAC_PI_2 {
            1.0
        } else {
            0.0
        }
    } else if ax >= FRAC_PI_2 {
        0.0
    } else {
        x.cos().powi(m as i32)
    }
}

/// `(H^m)'` for `m >= 1`; zero at and beyond the support boundary.
pub(crate) fn deriv_power(m: u32, x: f64) -> f64 {
    debug_assert!(m >= 1);
    if x.abs() >= FRAC_PI_2 {
        0.0
    } else {
        -f64::from(m) * x.cos().powi(m as i32 - 1) * x.sin()
    }
}

/// Binomial coefficient as `f64`; exact for the small orders used here.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn order_zero_rejected() {
        assert!(matches!(
            BumpOrder::new(0),
            Err(Error::OrderTooSmall { min: 1, got: 0 })
        ));
    }

    #[test]
    fn eval_examples() {
        let m1 = BumpOrder::new(1).unwrap();
        let m2 = BumpOrder::new(2).unwrap();
        let m3 = BumpOrder::new(3).unwrap();
        assert_eq!(m1.eval(0.0).unwrap(), 1.0);
        assert_eq!(m2.eval(FRAC_PI_2).unwrap(), 0.0);
        assert_abs_diff_eq!(m3.eval(PI / 3.0).unwrap(), 0.125, epsilon = 1e-15);
        assert_eq!(m1.eval(2.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_non_finite() {
        let m = BumpOrder::new(1).unwrap();
        assert!(m.eval(f64::NAN).is_err());
        assert!(m.deriv(f64::INFINITY).is_err());
    }

    #[test]
    fn deriv_examples() {
        let m1 = BumpOrder::new(1).unwrap();
        let m2 = BumpOrder::new(2).unwrap();
        assert_eq!(m2.deriv(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            m1.deriv(FRAC_PI_4).unwrap(),
            -std::f64::consts::SQRT_2 / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(m2.deriv(FRAC_PI_4).unwrap(), -1.0, epsilon = 1e-15);
        assert_eq!(m2.deriv(FRAC_PI_2).unwrap(), 0.0);
    }

    #[test]
    fn deriv_continuous_at_boundary_for_higher_orders() {
        for m in 2..=6 {
            let order = BumpOrder::new(m).unwrap();
            let inside = order.deriv(FRAC_PI_2 - 1e-8).unwrap();
            assert!(inside.abs() < 1e-6, "m={m}: inside limit {inside}");
            assert_eq!(order.deriv(FRAC_PI_2).unwrap(), 0.0);
        }
    }

    #[test]
    fn power_zero_is_closed_indicator() {
        assert_eq!(eval_power(0, 0.0), 1.0);
        assert_eq!(eval_power(0, FRAC_PI_2), 1.0);
        assert_eq!(eval_power(0, -FRAC_PI_2), 1.0);
        assert_eq!(eval_power(0, 1.6), 0.0);
        for &x in &[-2.0, -0.3, 0.0, 1.0, 3.0] {
            assert!(eval_power(0, x) <= 1.0);
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(8, 0), 1.0);
    }
}
