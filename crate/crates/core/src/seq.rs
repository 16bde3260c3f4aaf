//! Shift sequences under the gap condition, and their coefficient vectors.

use crate::bump::BumpOrder;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// A finite strictly increasing shift sequence paired with a bump order `M`,
/// validated against the gap condition: every `M`-step window spans at least
/// `pi`, i.e. `shifts[n + M] - shifts[n] >= pi`.
///
/// The gap condition is what limits how many shifted bumps can overlap at a
/// point; a single shift satisfies it vacuously.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSequence {
    order: BumpOrder,
    shifts: Vec<f64>,
}

impl GapSequence {
    pub fn new(order: BumpOrder, shifts: Vec<f64>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::invalid("a gap sequence needs at least one shift"));
        }
        if shifts.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite { name: "shifts" });
        }
        for (index, pair) in shifts.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::NotIncreasing { index });
            }
        }
        let m = order.get() as usize;
        for lower in 0..shifts.len().saturating_sub(m) {
            let upper = lower + m;
            let gap = shifts[upper] - shifts[lower];
            if gap < PI {
                return Err(Error::GapTooSmall { lower, upper, gap });
            }
        }
        Ok(Self { order, shifts })
    }

    /// Single shift at `position`; the gap condition holds vacuously.
    pub fn single(order: BumpOrder, position: f64) -> Result<Self> {
        Self::new(order, vec![position])
    }

    pub fn order(&self) -> BumpOrder {
        self.order
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }
}

/// Complex coefficients paired with a [`GapSequence`]. Length agreement is
/// checked by the operations that consume both.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector(Vec<Complex64>);

impl CoefficientVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    }

    /// Random coefficients with `|re|, |im| <= 1`. If the draw is nearly
    /// zero everywhere the first entry is set to 1, so normalized quantities
    /// stay well defined.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut values: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if values.iter().all(|c| c.norm() < 1e-3) {
            if let Some(first) = values.first_mut() {
                *first = Complex64::new(1.0, 0.0);
            }
        }
        Self(values)
    }

    /// Random real coefficients in `[-1, 1]`.
    pub fn random_real(len: usize, rng: &mut impl Rng) -> Self {
        let mut values: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        if values.iter().all(|c| c.norm() < 1e-3) {
            if let Some(first) = values.first_mut() {
                *first = Complex64::new(1.0, 0.0);
            }
        }
        Self(values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|c| c.im == 0.0)
    }
}

pub(crate) fn check_lengths(seq: &GapSequence, coeffs: &CoefficientVector) -> Result<()> {
    if seq.len() != coeffs.len() {
        return Err(Error::LengthMismatch { coeffs: coeffs.len(), shifts: seq.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn order(m: u32) -> BumpOrder {
        BumpOrder::new(m).unwrap()
    }

    #[test]
    fn accepts_valid_sequences() {
        assert!(GapSequence::new(order(1), vec![0.0, PI, 2.0 * PI]).is_ok());
        assert!(GapSequence::new(order(2), vec![0.0, FRAC_PI_2, PI]).is_ok());
        assert!(GapSequence::single(order(3), -4.2).is_ok());
    }

    #[test]
    fn rejects_gap_violations() {
        let err = GapSequence::new(order(1), vec![0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::GapTooSmall { lower: 0, upper: 1, .. }));
        let err = GapSequence::new(order(2), vec![0.0, 1.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::GapTooSmall { lower: 0, upper: 2, .. }));
        // M = 2 does not constrain consecutive gaps.
        assert!(GapSequence::new(order(2), vec![0.0, 0.1, PI]).is_ok());
    }

    #[test]
    fn rejects_non_increasing_and_non_finite() {
        assert!(matches!(
            GapSequence::new(order(1), vec![0.0, 0.0]),
            Err(Error::NotIncreasing { index: 0 })
        ));
        assert!(matches!(
            GapSequence::new(order(1), vec![1.0, 0.5]),
            Err(Error::NotIncreasing { index: 0 })
        ));
        assert!(GapSequence::new(order(1), vec![f64::NAN]).is_err());
        assert!(GapSequence::new(order(1), vec![]).is_err());
    }
}
