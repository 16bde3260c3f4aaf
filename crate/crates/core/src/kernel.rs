//! The correlation kernel `g_M`.
//!
//! For order `M >= 2`,
//!
//! ```text
//! g_M(lambda) = integral of H^M(x + lambda) * H^{M-2}(x) dx
//! ```
//!
//! an even, nonnegative function vanishing for `|lambda| >= pi`. The
//! quadratic form built from `g_M` is what the derivative bound for
//! gap-constrained bump combinations reduces to, so this evaluator is
//! checked three ways: hard-coded closed forms for `M = 2, 3, 4`, a generic
//! term-by-term exact integration for any `M >= 2`, and an independent
//! Gauss-Legendre oracle.

use crate::bump::{binomial, eval_power, BumpOrder};
use crate::error::{Error, Result};
use crate::expsum::exp_integral;
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Evaluation strategy for [`KernelTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMethod {
    /// Hard-coded antiderivative; only available for `M` in `{2, 3, 4}`.
    ClosedForm,
    /// Binomial expansion of both factors, integrated term by term over the
    /// support intersection. Exact up to rounding for any `M >= 2`.
    GenericExact,
}

/// Evaluator for `g_M`.
#[derive(Clone, Copy, Debug)]
pub struct KernelTable {
    order: BumpOrder,
    method: KernelMethod,
}

impl KernelTable {
    pub fn new(order: BumpOrder, method: KernelMethod) -> Result<Self> {
        if order.get() < 2 {
            return Err(Error::OrderTooSmall { min: 2, got: order.get() });
        }
        if method == KernelMethod::ClosedForm && !(2..=4).contains(&order.get()) {
            return Err(Error::NoClosedForm(order.get()));
        }
        Ok(Self { order, method })
    }

    /// Closed form when available, generic exact integration otherwise.
    pub fn auto(order: BumpOrder) -> Result<Self> {
        let method = if (2..=4).contains(&order.get()) {
            KernelMethod::ClosedForm
        } else {
            KernelMethod::GenericExact
        };
        Self::new(order, method)
    }

    pub fn order(&self) -> BumpOrder {
        self.order
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    /// `g_M(lambda)`. Even in `lambda`, nonnegative, exactly `0` for
    /// `|lambda| >= pi`. Near the support edge the antiderivatives cancel to
    /// far below one ulp of their terms; the rounding residue is clamped at
    /// zero to keep the sign contract.
    pub fn eval(&self, lambda: f64) -> f64 {
        debug_assert!(lambda.is_finite());
        let lam = lambda.abs();
        if lam >= PI {
            return 0.0;
        }
        let raw = match self.method {
            KernelMethod::ClosedForm => match self.order.get() {
                2 => g2(lam),
                3 => g3(lam),
                4 => g4(lam),
                _ => unreachable!("constructor rejects other orders"),
            },
            KernelMethod::GenericExact => generic_exact(self.order.get(), lam),
        };
        raw.max(0.0)
    }
}

// Antiderivatives for 0 <= x <= pi.
fn g2(x: f64) -> f64 {
    (2.0 * (PI - x) + (2.0 * x).sin()) / 4.0
}

fn g3(x: f64) -> f64 {
    (12.0 * (PI - x) * x.cos() + 9.0 * x.sin() + (3.0 * x).sin()) / 32.0
}

fn g4(x: f64) -> f64 {
    (36.0 * (PI - x) + 24.0 * (PI - x) * (2.0 * x).cos() + 28.0 * (2.0 * x).sin() + (4.0 * x).sin())
        / 192.0
}

/// Expand `cos^M(x + lam)` and `cos^{M-2}(x)` into complex exponentials and
/// integrate each product term over the support intersection
/// `[-pi/2, pi/2 - lam]`.
fn generic_exact(m: u32, lam: f64) -> f64 {
    debug_assert!(m >= 2 && (0.0..PI).contains(&lam));
    let lo = -FRAC_PI_2;
    let hi = FRAC_PI_2 - lam;
    if hi <= lo {
        return 0.0;
    }
    let scale_shifted = 2f64.powi(-(m as i32));
    let scale_plain = 2f64.powi(2 - m as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=m {
        let p = i64::from(m) - 2 * i64::from(j);
        let alpha = Complex64::from_polar(scale_shifted * binomial(m, j), p as f64 * lam);
        for k in 0..=(m - 2) {
            let q = i64::from(m) - 2 - 2 * i64::from(k);
            let beta = scale_plain * binomial(m - 2, k);
            acc += alpha * beta * exp_integral(p + q, lo, hi);
        }
    }
    acc.re
}

/// Independent Gauss-Legendre evaluation of `g_M(lambda)` with `nodes`
/// quadrature points over the support intersection.
pub fn quadrature_oracle(order: BumpOrder, lambda: f64, nodes: usize) -> Result<f64> {
    if order.get() < 2 {
        return Err(Error::OrderTooSmall { min: 2, got: order.get() });
    }
    let rule = GaussLegendre::new(nodes)?;
    if !lambda.is_finite() {
        return Err(Error::NonFinite { name: "lambda" });
    }
    let lam = lambda.abs();
    if lam >= PI {
        return Ok(0.0);
    }
    let m = order.get();
    Ok(rule.integrate(-FRAC_PI_2, FRAC_PI_2 - lam, |x| {
        eval_power(m, x + lam) * eval_power(m - 2, x)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn closed(m: u32) -> KernelTable {
        KernelTable::new(BumpOrder::new(m).unwrap(), KernelMethod::ClosedForm).unwrap()
    }

    fn generic(m: u32) -> KernelTable {
        KernelTable::new(BumpOrder::new(m).unwrap(), KernelMethod::GenericExact).unwrap()
    }

    #[test]
    fn constructor_contracts() {
        assert!(matches!(
            KernelTable::new(BumpOrder::new(1).unwrap(), KernelMethod::GenericExact),
            Err(Error::OrderTooSmall { min: 2, got: 1 })
        ));
        assert!(matches!(
            KernelTable::new(BumpOrder::new(5).unwrap(), KernelMethod::ClosedForm),
            Err(Error::NoClosedForm(5))
        ));
        assert_eq!(
            KernelTable::auto(BumpOrder::new(5).unwrap()).unwrap().method(),
            KernelMethod::GenericExact
        );
        assert_eq!(
            KernelTable::auto(BumpOrder::new(3).unwrap()).unwrap().method(),
            KernelMethod::ClosedForm
        );
    }

    #[test]
    fn closed_form_anchor_values() {
        assert_abs_diff_eq!(closed(2).eval(0.0), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(closed(2).eval(FRAC_PI_2), PI / 4.0, epsilon = 1e-15);
        assert_eq!(closed(2).eval(PI), 0.0);
        assert_abs_diff_eq!(closed(3).eval(0.0), 3.0 * PI / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(closed(4).eval(0.0), 5.0 * PI / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn even_nonnegative_compact_support() {
        for m in 2..=4 {
            let table = closed(m);
            let mut x = -PI;
            while x <= PI {
                let v = table.eval(x);
                assert!(v >= 0.0, "g_{m}({x}) = {v} < 0");
                assert_abs_diff_eq!(v, table.eval(-x), epsilon = 1e-14);
                x += 1e-3;
            }
            for &lam in &[PI, -PI, 4.0, -10.0, 100.0] {
                assert_eq!(table.eval(lam), 0.0);
            }
        }
    }

    #[test]
    fn closed_generic_and_quadrature_agree() {
        for m in 2..=4 {
            let c = closed(m);
            let g = generic(m);
            let order = BumpOrder::new(m).unwrap();
            let mut lam = 0.0;
            while lam <= PI {
                let cv = c.eval(lam);
                let gv = g.eval(lam);
                let qv = quadrature_oracle(order, lam, 64).unwrap();
                assert_abs_diff_eq!(cv, gv, epsilon = 1e-12);
                assert_abs_diff_eq!(cv, qv, epsilon = 1e-11);
                lam += 0.05;
            }
        }
    }

    #[test]
    fn generic_covers_higher_orders() {
        // No closed form for M = 6; the quadrature oracle is the only check.
        let table = generic(6);
        let order = BumpOrder::new(6).unwrap();
        for &lam in &[0.0, 0.3, 1.0, 2.0, 3.0] {
            let qv = quadrature_oracle(order, lam, 96).unwrap();
            assert_abs_diff_eq!(table.eval(lam), qv, epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_examples() {
        let m2 = BumpOrder::new(2).unwrap();
        let m3 = BumpOrder::new(3).unwrap();
        assert_abs_diff_eq!(
            quadrature_oracle(m2, 0.0, 64).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            quadrature_oracle(m3, FRAC_PI_2, 64).unwrap(),
            closed(3).eval(FRAC_PI_2),
            epsilon = 1e-10
        );
        assert_eq!(quadrature_oracle(m2, 1.5 * PI, 64).unwrap(), 0.0);
        assert!(matches!(
            quadrature_oracle(m2, 0.0, 8),
            Err(Error::TooFewNodes { .. })
        ));
    }

    #[test]
    fn complement_identity_only_for_order_two() {
        let table = closed(2);
        let g0 = table.eval(0.0);
        let mut x = 0.0;
        while x <= PI {
            assert_abs_diff_eq!(table.eval(x) + table.eval(PI - x), g0, epsilon = 1e-12);
            x += 1e-2;
        }
        // The analogous sum fails for M = 3: at x = pi/2 it equals 1/2, far
        // from g_3(0) = 3*pi/8.
        let t3 = closed(3);
        let sum = t3.eval(FRAC_PI_2) + t3.eval(PI - FRAC_PI_2);
        assert_abs_diff_eq!(sum, 0.5, epsilon = 1e-12);
        assert!((sum - t3.eval(0.0)).abs() > 0.5);
    }
}
