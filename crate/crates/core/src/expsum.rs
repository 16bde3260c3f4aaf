//! Piecewise complex-exponential sums and their exact L2 calculus.
//!
//! Shifted bump powers, the combinations built from them, and all of their
//! derivatives are finite sums `sum_k c_k e^{ikx}` with integer frequencies
//! on each interval between breakpoints. Working in that closed class makes
//! every inner product a finite sum of elementary antiderivatives, so norms
//! and Gram matrices come out exact up to rounding; no quadrature is
//! involved on this path.

use crate::bump::{binomial, BumpOrder};
use crate::error::Result;
use crate::linalg::SymMatrix;
use crate::seq::{check_lengths, CoefficientVector, GapSequence};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

/// Intervals thinner than this are dropped during refinement; guards against
/// floating-point-coincident breakpoints.
const MIN_PIECE_WIDTH: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One exponential term `coeff * e^{i freq x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub coeff: Complex64,
    pub freq: i64,
}

/// A function that vanishes outside `[first breakpoint, last breakpoint]`
/// and equals a finite exponential sum on each interval in between.
#[derive(Clone, Debug)]
pub struct PiecewiseExpSum {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<ExpTerm>>,
    real: bool,
}

impl PiecewiseExpSum {
    /// The zero function.
    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), pieces: Vec::new(), real: true }
    }

    /// Whether the represented function is real-valued (conjugate-symmetric
    /// term structure by construction).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Support interval, `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.breakpoints.as_slice() {
            [] | [_] => None,
            [first, .., last] => Some((*first, *last)),
        }
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let (first, last) = self.support()?;
        if x < first || x > last {
            return None;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        Some(idx.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self.piece_index(x) {
            None => ZERO,
            Some(i) => eval_terms(&self.pieces[i], x),
        }
    }

    /// Real-part evaluation; when the real flag is set the imaginary part is
    /// a rounding residue only.
    pub fn eval_real(&self, x: f64) -> f64 {
        let v = self.eval(x);
        debug_assert!(
            !self.real || v.im.abs() <= 1e-12 * (1.0 + v.re.abs()),
            "imaginary residue {} on a real-flagged function",
            v.im
        );
        v.re
    }

    /// Term-by-term differentiation: `c e^{ikx} -> ik c e^{ikx}`. Valid
    /// almost everywhere; the piece structure is preserved.
    pub fn derivative(&self) -> Self {
        let pieces: Vec<Vec<ExpTerm>> = self
            .pieces
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter(|t| t.freq != 0)
                    .map(|t| ExpTerm {
                        coeff: t.coeff * Complex64::new(0.0, t.freq as f64),
                        freq: t.freq,
                    })
                    .collect()
            })
            .collect();
        let mut out = Self { breakpoints: self.breakpoints.clone(), pieces, real: self.real };
        out.trim();
        out
    }

    /// Exact `integral f(x) conj(g(x)) dx` over the common support.
    pub fn l2_inner(&self, other: &Self) -> Complex64 {
        let (Some((alo, ahi)), Some((blo, bhi))) = (self.support(), other.support()) else {
            return ZERO;
        };
        let lo = alo.max(blo);
        let hi = ahi.min(bhi);
        if hi - lo <= MIN_PIECE_WIDTH {
            return ZERO;
        }
        let mut cuts: Vec<f64> = vec![lo, hi];
        for &b in self.breakpoints.iter().chain(&other.breakpoints) {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|cur, prev| (*cur - *prev).abs() < MIN_PIECE_WIDTH);

        let mut acc = ZERO;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= MIN_PIECE_WIDTH {
                continue;
            }
            let mid = 0.5 * (a + b);
            let (Some(i), Some(j)) = (self.piece_index(mid), other.piece_index(mid)) else {
                continue;
            };
            for t1 in &self.pieces[i] {
                for t2 in &other.pieces[j] {
                    let c = t1.coeff * t2.coeff.conj();
                    acc += c * exp_integral(t1.freq - t2.freq, a, b);
                }
            }
        }
        acc
    }

    /// `integral |f|^2`, clamped at zero against rounding residue.
    pub fn l2_norm_sq(&self) -> f64 {
        let v = self.l2_inner(self);
        debug_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()));
        v.re.max(0.0)
    }

    /// Largest jump of the represented function across any breakpoint,
    /// including the two outer ones (where the comparison is against zero).
    pub fn max_breakpoint_jump(&self) -> f64 {
        if self.pieces.is_empty() {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().expect("non-empty");
        worst = worst.max(eval_terms(&self.pieces[0], first).norm());
        worst = worst.max(eval_terms(self.pieces.last().expect("non-empty"), last).norm());
        for i in 1..self.pieces.len() {
            let b = self.breakpoints[i];
            let left = eval_terms(&self.pieces[i - 1], b);
            let right = eval_terms(&self.pieces[i], b);
            worst = worst.max((left - right).norm());
        }
        worst
    }

    /// Linear combination `sum scale_k * part_k`, refined over the union of
    /// all breakpoints.
    pub fn combine(parts: &[(Complex64, &PiecewiseExpSum)]) -> Self {
        let mut cuts: Vec<f64> = parts
            .iter()
            .flat_map(|(_, f)| f.breakpoints.iter().copied())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|cur, prev| (*cur - *prev).abs() < MIN_PIECE_WIDTH);
        if cuts.len() < 2 {
            return Self::zero();
        }
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut merged: BTreeMap<i64, Complex64> = BTreeMap::new();
            for (scale, f) in parts {
                if let Some(i) = f.piece_index(mid) {
                    for t in &f.pieces[i] {
                        *merged.entry(t.freq).or_insert(ZERO) += scale * t.coeff;
                    }
                }
            }
            pieces.push(
                merged
                    .into_iter()
                    .filter(|&(_, c)| c != ZERO)
                    .map(|(freq, coeff)| ExpTerm { coeff, freq })
                    .collect(),
            );
        }
        let real = parts.iter().all(|(scale, f)| scale.im == 0.0 && f.real);
        let mut out = Self { breakpoints: cuts, pieces, real };
        out.trim();
        out
    }

    fn trim(&mut self) {
        while self.pieces.first().is_some_and(Vec::is_empty) {
            self.pieces.remove(0);
            self.breakpoints.remove(0);
        }
        while self.pieces.last().is_some_and(Vec::is_empty) {
            self.pieces.pop();
            self.breakpoints.pop();
        }
        if self.pieces.is_empty() {
            self.breakpoints.clear();
        }
    }
}

fn eval_terms(terms: &[ExpTerm], x: f64) -> Complex64 {
    terms
        .iter()
        .map(|t| t.coeff * Complex64::cis(t.freq as f64 * x))
        .sum()
}

/// `integral of e^{i k x} dx` over `[lo, hi]`. The zero frequency is the
/// interval length; everything else uses the elementary antiderivative.
pub(crate) fn exp_integral(freq: i64, lo: f64, hi: f64) -> Complex64 {
    if freq == 0 {
        Complex64::new(hi - lo, 0.0)
    } else {
        let k = freq as f64;
        (Complex64::cis(k * hi) - Complex64::cis(k * lo)) / Complex64::new(0.0, k)
    }
}

/// The shifted bump power `H^M(x + shift)` as a single-piece exponential
/// sum on `[-pi/2 - shift, pi/2 - shift]`: frequencies `M - 2j` with
/// coefficients `2^{-M} C(M, j) e^{i (M - 2j) shift}`.
pub fn expand_bump(order: BumpOrder, shift: f64) -> PiecewiseExpSum {
    let m = order.get();
    let scale = 2f64.powi(-(m as i32));
    let terms: Vec<ExpTerm> = (0..=m)
        .map(|j| {
            let freq = i64::from(m) - 2 * i64::from(j);
            ExpTerm {
                coeff: Complex64::from_polar(scale * binomial(m, j), freq as f64 * shift),
                freq,
            }
        })
        .collect();
    PiecewiseExpSum {
        breakpoints: vec![-FRAC_PI_2 - shift, FRAC_PI_2 - shift],
        pieces: vec![terms],
        real: true,
    }
}

/// The combination `sum_n a_n H^M(x + shift_n)`.
pub fn bump_sum(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<PiecewiseExpSum> {
    check_lengths(seq, coeffs)?;
    let bumps: Vec<PiecewiseExpSum> = seq
        .shifts()
        .iter()
        .map(|&s| expand_bump(seq.order(), s))
        .collect();
    let parts: Vec<(Complex64, &PiecewiseExpSum)> = coeffs
        .values()
        .iter()
        .copied()
        .zip(bumps.iter())
        .collect();
    Ok(PiecewiseExpSum::combine(&parts))
}

/// `(||G||^2, ||G'||^2)` for the combination above; both exact integrals.
pub fn bump_sum_norms(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<(f64, f64)> {
    let g = bump_sum(seq, coeffs)?;
    Ok((g.l2_norm_sq(), g.derivative().l2_norm_sq()))
}

/// Gram matrices of the shifted bumps (`values`) and of their derivatives
/// (`derivatives`), so that `||G||^2 = a* values a` and
/// `||G'||^2 = a* derivatives a`.
#[derive(Clone, Debug)]
pub struct GramMatrices {
    pub values: SymMatrix,
    pub derivatives: SymMatrix,
}

pub fn gram_matrices(seq: &GapSequence) -> GramMatrices {
    let bumps: Vec<PiecewiseExpSum> = seq
        .shifts()
        .iter()
        .map(|&s| expand_bump(seq.order(), s))
        .collect();
    let derivs: Vec<PiecewiseExpSum> = bumps.iter().map(PiecewiseExpSum::derivative).collect();
    let n = bumps.len();
    GramMatrices {
        values: SymMatrix::from_fn(n, |i, j| bumps[i].l2_inner(&bumps[j]).re),
        derivatives: SymMatrix::from_fn(n, |i, j| derivs[i].l2_inner(&derivs[j]).re),
    }
}
