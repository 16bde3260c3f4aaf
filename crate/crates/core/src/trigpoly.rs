//! Trigonometric polynomials and Parseval norms over one period.
//!
//! The classical derivative bound `||T'||_2 <= M ||T||_2` on an interval of
//! length `2 pi` is immediate from the coefficients; this module carries the
//! coefficient-side machinery and the `sin^M` expansion used to tie the
//! periodic picture to the compactly supported bumps.

use crate::bump::binomial;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// `T(x) = sum_{k=-M}^{M} a_k e^{ikx}` with exactly `2M + 1` coefficient
/// slots.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    order: u32,
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn new(order: u32, coeffs: Vec<Complex64>) -> Result<Self> {
        if order < 1 {
            return Err(Error::OrderTooSmall { min: 1, got: order });
        }
        let expected = 2 * order as usize + 1;
        if coeffs.len() != expected {
            return Err(Error::invalid(format!(
                "order {order} needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { order, coeffs })
    }

    /// The single mode `e^{ikx}`, `|k| <= order`.
    pub fn mode(order: u32, k: i64) -> Result<Self> {
        if k.unsigned_abs() > u64::from(order) {
            return Err(Error::invalid(format!("mode {k} exceeds order {order}")));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order as usize + 1];
        coeffs[(k + i64::from(order)) as usize] = Complex64::new(1.0, 0.0);
        Self::new(order, coeffs)
    }

    /// Binomial expansion of `sin^M x` into exponentials:
    /// `(2i)^{-M} sum_j C(M, j) (-1)^{M-j} e^{i(2j - M)x}`.
    pub fn sin_power(order: u32) -> Result<Self> {
        if order < 1 {
            return Err(Error::OrderTooSmall { min: 1, got: order });
        }
        let inv_2i = Complex64::new(0.0, -0.5); // 1 / (2i)
        let scale = inv_2i.powu(order);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order as usize + 1];
        for j in 0..=order {
            let k = 2 * i64::from(j) - i64::from(order);
            let sign = if (order - j) % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[(k + i64::from(order)) as usize] = scale * sign * binomial(order, j);
        }
        Self::new(order, coeffs)
    }

    /// Independent coefficients with real and imaginary parts uniform in
    /// `[-1, 1]`.
    pub fn random(order: u32, rng: &mut impl Rng) -> Result<Self> {
        let coeffs = (0..2 * order as usize + 1)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Self::new(order, coeffs)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficient `a_k`; zero outside `[-order, order]`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + i64::from(self.order);
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let k = idx as i64 - i64::from(self.order);
                c * Complex64::cis(k as f64 * x)
            })
            .sum()
    }

    /// `(||T||^2, ||T'||^2)` over one period, from orthogonality:
    /// `2 pi sum |a_k|^2` and `2 pi sum k^2 |a_k|^2`. The derivative norm
    /// never exceeds `order^2` times the value norm.
    pub fn parseval_norms(&self) -> (f64, f64) {
        let two_pi = 2.0 * PI;
        let mut norm = 0.0;
        let mut deriv = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = idx as f64 - f64::from(self.order);
            let sq = c.norm_sqr();
            norm += sq;
            deriv += k * k * sq;
        }
        (two_pi * norm, two_pi * deriv)
    }
}
