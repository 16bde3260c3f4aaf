//! Reduction of the derivative bound to kernel quadratic forms.
//!
//! For order `M >= 2` the defect `M^2 ||G||^2 - ||G'||^2` of a combination
//! `G = sum a_n H^M(. + shift_n)` equals `M (M - 1)` times the quadratic
//! form `Q = sum g_M(shift_m - shift_n) a_m conj(a_n)`. That identity turns
//! the bound into a positive-semidefiniteness question about the kernel
//! Gram matrix, which is what this module computes and checks. The order-2
//! case additionally splits `Q` into two visibly nonnegative sums.

use crate::bump::{eval_power, BumpOrder};
use crate::error::{Error, Result};
use crate::expsum::{bump_sum_norms, expand_bump};
use crate::kernel::KernelTable;
use crate::linalg::SymMatrix;
use crate::seq::{check_lengths, CoefficientVector, GapSequence};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Everything the reduction produces for one `(shifts, coefficients)` pair.
#[derive(Clone, Debug)]
pub struct QuadFormReport {
    /// Bump order `M`.
    pub order: u32,
    /// Matrix with entries `g_M(shift_m - shift_n)`; banded with bandwidth
    /// `< M` for any valid gap sequence.
    pub kernel_gram: SymMatrix,
    /// `Q = a* kernel_gram a`, evaluated as a direct double sum.
    pub q: f64,
    /// `M^2 ||G||^2 - ||G'||^2`, evaluated by exact integration.
    pub defect: f64,
    /// `| defect - M (M - 1) Q |`.
    pub identity_residual: f64,
    /// Smallest eigenvalue of `kernel_gram`.
    pub min_eigenvalue: f64,
}

/// Kernel Gram matrix `(g_M(shift_m - shift_n))_{m,n}`.
pub fn kernel_gram(seq: &GapSequence) -> Result<SymMatrix> {
    let table = KernelTable::auto(seq.order())?;
    let shifts = seq.shifts();
    Ok(SymMatrix::from_fn(seq.len(), |i, j| {
        table.eval(shifts[i] - shifts[j])
    }))
}

/// The quadratic form `sum_{m,n} g_M(shift_m - shift_n) a_m conj(a_n)` as a
/// direct double sum. Hermitian, so the imaginary part is rounding residue.
pub fn quad_form(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<f64> {
    check_lengths(seq, coeffs)?;
    let table = KernelTable::auto(seq.order())?;
    let shifts = seq.shifts();
    let a = coeffs.values();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..a.len() {
        for n in 0..a.len() {
            acc += table.eval(shifts[m] - shifts[n]) * a[m] * a[n].conj();
        }
    }
    debug_assert!(acc.im.abs() <= 1e-12 * (1.0 + acc.re.abs()));
    Ok(acc.re)
}

/// `M^2 ||G||^2 - ||G'||^2`; the derivative bound says this is nonnegative.
pub fn defect(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<f64> {
    let (norm_sq, deriv_norm_sq) = bump_sum_norms(seq, coeffs)?;
    let m = f64::from(seq.order().get());
    Ok(m * m * norm_sq - deriv_norm_sq)
}

/// Evaluate both sides of the reduction identity independently and report
/// the residual together with the kernel Gram spectrum bound.
pub fn reduction_report(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<QuadFormReport> {
    let m = seq.order().get();
    if m < 2 {
        return Err(Error::OrderTooSmall { min: 2, got: m });
    }
    check_lengths(seq, coeffs)?;
    let gram = kernel_gram(seq)?;
    let q = quad_form(seq, coeffs)?;
    let d = defect(seq, coeffs)?;
    let identity_residual = (d - f64::from(m * (m - 1)) * q).abs();
    let min_eigenvalue = gram.min_eigenvalue()?;
    Ok(QuadFormReport {
        order: m,
        kernel_gram: gram,
        q,
        defect: d,
        identity_residual,
        min_eigenvalue,
    })
}

/// Residual of the pointwise identity
/// `(H^M)''(x) = -M^2 H^M(x) + M (M - 1) H^{M-2}(x)`, with the second
/// derivative taken analytically from the exponential expansion.
///
/// `x = +-pi/2` is rejected: the second derivative is one-sided there.
pub fn second_derivative_residual(order: BumpOrder, x: f64) -> Result<f64> {
    let m = order.get();
    if m < 2 {
        return Err(Error::OrderTooSmall { min: 2, got: m });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite { name: "x" });
    }
    if x.abs() == FRAC_PI_2 {
        return Err(Error::invalid(
            "x = +-pi/2 is excluded: the second derivative is one-sided there",
        ));
    }
    let second = expand_bump(order, 0.0).derivative().derivative();
    let lhs = second.eval(x).re;
    let mf = f64::from(m);
    let rhs = -mf * mf * eval_power(m, x) + mf * (mf - 1.0) * eval_power(m - 2, x);
    Ok((lhs - rhs).abs())
}

/// The order-2 split of the quadratic form into a pair sum and a diagonal
/// sum.
#[derive(Clone, Copy, Debug)]
pub struct M2Split {
    /// `sum_n g(gap_n) |a_n + a_{n+1}|^2`; nonnegative since `g >= 0`.
    pub pair_sum: f64,
    /// `sum_n (g(0) - g(left gap) - g(right gap)) |a_n|^2`; nonnegative by
    /// the kernel pair bound.
    pub diag_sum: f64,
    /// `| pair_sum + diag_sum - Q |` against the direct double sum.
    pub residual: f64,
}

/// Split `Q` for an order-2 sequence. Out-of-range neighbor gaps count as
/// at least `pi`, so their kernel values are zero; this reproduces the
/// doubly infinite sum with finitely many nonzero coefficients.
pub fn decompose_m2(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<M2Split> {
    if seq.order().get() != 2 {
        return Err(Error::invalid(format!(
            "the pair/diagonal split needs order 2, got {}",
            seq.order()
        )));
    }
    check_lengths(seq, coeffs)?;
    let table = KernelTable::auto(seq.order())?;
    let g0 = table.eval(0.0);
    let shifts = seq.shifts();
    let a = coeffs.values();
    let n = a.len();

    let mut pair_sum = 0.0;
    for i in 0..n.saturating_sub(1) {
        pair_sum += table.eval(shifts[i + 1] - shifts[i]) * (a[i] + a[i + 1]).norm_sqr();
    }
    let mut diag_sum = 0.0;
    for i in 0..n {
        let left = if i > 0 { table.eval(shifts[i] - shifts[i - 1]) } else { 0.0 };
        let right = if i + 1 < n { table.eval(shifts[i + 1] - shifts[i]) } else { 0.0 };
        diag_sum += (g0 - left - right) * a[i].norm_sqr();
    }
    let q = quad_form(seq, coeffs)?;
    Ok(M2Split {
        pair_sum,
        diag_sum,
        residual: (pair_sum + diag_sum - q).abs(),
    })
}

/// `g(0) - g(a) - g(b)` for the order-2 kernel, defined on the region
/// `a, b >= 0`, `a + b >= pi` where it is nonnegative, with equality exactly
/// on the line `a + b = pi`.
pub fn kernel_pair_deficit(a_gap: f64, b_gap: f64) -> Result<f64> {
    if !a_gap.is_finite() || !b_gap.is_finite() {
        return Err(Error::NonFinite { name: "gap" });
    }
    if a_gap < 0.0 || b_gap < 0.0 || a_gap + b_gap < PI - 1e-9 {
        return Err(Error::invalid(format!(
            "kernel pair bound needs a, b >= 0 and a + b >= pi; got a = {a_gap}, b = {b_gap}"
        )));
    }
    let table = KernelTable::auto(BumpOrder::new(2)?)?;
    Ok(table.eval(0.0) - table.eval(a_gap) - table.eval(b_gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn order(m: u32) -> BumpOrder {
        BumpOrder::new(m).unwrap()
    }

    fn ones(n: usize) -> CoefficientVector {
        CoefficientVector::from_real(&vec![1.0; n])
    }

    #[test]
    fn kernel_gram_examples() {
        let seq = GapSequence::new(order(2), vec![0.0, PI]).unwrap();
        let gram = kernel_gram(&seq).unwrap();
        assert_abs_diff_eq!(gram.get(0, 0), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(gram.get(0, 1), 0.0);

        let single = GapSequence::single(order(3), 1.0).unwrap();
        let gram = kernel_gram(&single).unwrap();
        assert_eq!(gram.dim(), 1);
        assert_abs_diff_eq!(gram.get(0, 0), 3.0 * PI / 8.0, epsilon = 1e-15);

        let tri = GapSequence::new(order(2), vec![0.0, FRAC_PI_2, PI]).unwrap();
        let gram = kernel_gram(&tri).unwrap();
        assert_abs_diff_eq!(gram.get(0, 1), PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gram.get(1, 2), PI / 4.0, epsilon = 1e-15);
        assert_eq!(gram.get(0, 2), 0.0);
    }

    #[test]
    fn kernel_gram_needs_order_two() {
        let seq = GapSequence::new(order(1), vec![0.0, PI]).unwrap();
        assert!(matches!(
            kernel_gram(&seq),
            Err(Error::OrderTooSmall { min: 2, got: 1 })
        ));
    }

    #[test]
    fn quad_form_examples() {
        let seq = GapSequence::new(order(2), vec![0.0, FRAC_PI_2]).unwrap();
        assert_eq!(
            quad_form(&seq, &CoefficientVector::from_real(&[0.0, 0.0])).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            quad_form(&seq, &ones(2)).unwrap(),
            1.5 * PI,
            epsilon = 1e-13
        );
        let single = GapSequence::single(order(2), 0.0).unwrap();
        assert_abs_diff_eq!(quad_form(&single, &ones(1)).unwrap(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn defect_examples() {
        let m1 = GapSequence::new(order(1), vec![0.0, 3.5]).unwrap();
        let a = CoefficientVector::from_real(&[0.4, -0.9]);
        let d = defect(&m1, &a).unwrap();
        assert!(d.abs() <= 1e-12);

        let m2 = GapSequence::single(order(2), 0.0).unwrap();
        assert_abs_diff_eq!(defect(&m2, &ones(1)).unwrap(), PI, epsilon = 1e-12);

        let m3 = GapSequence::single(order(3), 0.0).unwrap();
        assert_abs_diff_eq!(defect(&m3, &ones(1)).unwrap(), 2.25 * PI, epsilon = 1e-12);
    }

    #[test]
    fn reduction_identity_anchors() {
        let m2 = GapSequence::single(order(2), 0.0).unwrap();
        let report = reduction_report(&m2, &ones(1)).unwrap();
        assert_abs_diff_eq!(report.defect, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(2.0 * report.q, PI, epsilon = 1e-12);
        assert!(report.identity_residual <= 1e-12);
        assert_abs_diff_eq!(report.min_eigenvalue, FRAC_PI_2, epsilon = 1e-12);

        let m3 = GapSequence::single(order(3), 0.0).unwrap();
        let report = reduction_report(&m3, &ones(1)).unwrap();
        assert_abs_diff_eq!(report.defect, 2.25 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(6.0 * report.q, 2.25 * PI, epsilon = 1e-12);

        let zeros = CoefficientVector::from_real(&[0.0]);
        let report = reduction_report(&m2, &zeros).unwrap();
        assert_eq!(report.defect, 0.0);
        assert_eq!(report.q, 0.0);
    }

    #[test]
    fn second_derivative_identity() {
        // (cos^2)''(0) = -2 and -4 * 1 + 2 * 1 = -2.
        assert!(second_derivative_residual(order(2), 0.0).unwrap() <= 1e-13);
        assert!(second_derivative_residual(order(3), PI / 4.0).unwrap() <= 1e-11);
        // Outside the support all three terms vanish.
        assert_eq!(second_derivative_residual(order(2), 2.0).unwrap(), 0.0);
        assert!(second_derivative_residual(order(2), FRAC_PI_2).is_err());
        assert!(second_derivative_residual(order(2), -FRAC_PI_2).is_err());
        assert!(matches!(
            second_derivative_residual(order(1), 0.3),
            Err(Error::OrderTooSmall { .. })
        ));
    }

    #[test]
    fn split_examples() {
        let single = GapSequence::single(order(2), 0.0).unwrap();
        let split = decompose_m2(&single, &ones(1)).unwrap();
        assert_eq!(split.pair_sum, 0.0);
        assert_abs_diff_eq!(split.diag_sum, FRAC_PI_2, epsilon = 1e-15);
        assert!(split.residual <= 1e-13);

        let seq = GapSequence::new(order(2), vec![0.0, FRAC_PI_2, PI]).unwrap();
        let alt = CoefficientVector::from_real(&[1.0, -1.0, 1.0]);
        let split = decompose_m2(&seq, &alt).unwrap();
        assert!(split.residual <= 1e-10);
        assert_abs_diff_eq!(split.pair_sum, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(split.diag_sum, FRAC_PI_2, epsilon = 1e-13);

        let m3 = GapSequence::single(order(3), 0.0).unwrap();
        assert!(decompose_m2(&m3, &ones(1)).is_err());
    }

    #[test]
    fn split_equal_gap_chain() {
        let shifts: Vec<f64> = (0..6).map(|n| n as f64 * FRAC_PI_2).collect();
        let seq = GapSequence::new(order(2), shifts).unwrap();
        let a = CoefficientVector::from_real(&[0.3, -1.2, 0.8, 0.1, -0.5, 0.9]);
        let split = decompose_m2(&seq, &a).unwrap();
        assert!(split.pair_sum >= 0.0);
        assert!(split.diag_sum >= -1e-12);
        assert!(split.residual <= 1e-10);
    }

    #[test]
    fn pair_deficit_examples() {
        assert_abs_diff_eq!(
            kernel_pair_deficit(FRAC_PI_2, FRAC_PI_2).unwrap(),
            0.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(kernel_pair_deficit(PI, PI).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        // Oracle: the antiderivative evaluated by hand at a = 0.4, b = 3.0.
        let g = |x: f64| {
            if x >= PI {
                0.0
            } else {
                (2.0 * (PI - x) + (2.0 * x).sin()) / 4.0
            }
        };
        let expected = g(0.0) - g(0.4) - g(3.0);
        let got = kernel_pair_deficit(0.4, 3.0).unwrap();
        assert!(got > 0.0);
        assert_abs_diff_eq!(got, expected, epsilon = 1e-14);
        assert!(kernel_pair_deficit(1.0, 1.0).is_err());
        assert!(kernel_pair_deficit(-0.1, 4.0).is_err());
    }
}
