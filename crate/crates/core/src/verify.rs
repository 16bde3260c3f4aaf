//! Named property suites behind the `verify` command.
//!
//! Each suite evaluates a family of residuals with a seeded random stream
//! and reports one line per property: the measured value, the threshold it
//! must stay on the right side of, and the resulting verdict. The suites
//! mirror the checks the test suite pins down, packaged for the command
//! line.

use crate::bump::BumpOrder;
use crate::error::{Error, Result};
use crate::expsum::bump_sum_norms;
use crate::kernel::{quadrature_oracle, KernelMethod, KernelTable};
use crate::quadform::{
    decompose_m2, defect, kernel_pair_deficit, reduction_report, second_derivative_residual,
};
use crate::quadrature::GaussLegendre;
use crate::search::{max_rayleigh, sample_gap_sequence};
use crate::seq::CoefficientVector;
use crate::trigpoly::TrigPolynomial;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Kernel evaluator: route agreement, symmetry, support, positivity.
    Kernel,
    /// The defect identity `M^2 ||G||^2 - ||G'||^2 = M(M-1) Q` and the
    /// pointwise second-derivative identity behind it.
    Reduction,
    /// Order 1: the derivative bound holds with equality.
    M1,
    /// Order 2: nonnegative defect, PSD kernel Gram, pair/diagonal split,
    /// kernel pair bound.
    M2,
    /// Periodic polynomials: the classical derivative bound and the
    /// `sin^M` / single-bump ratio laws.
    Bernstein,
    All,
}

impl Suite {
    pub const NAMES: &'static [&'static str] =
        &["kernel", "reduction", "m1", "m2", "bernstein", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Reduction => "reduction",
            Suite::M1 => "m1",
            Suite::M2 => "m2",
            Suite::Bernstein => "bernstein",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Suite::Kernel),
            "reduction" => Ok(Suite::Reduction),
            "m1" => Ok(Suite::M1),
            "m2" => Ok(Suite::M2),
            "bernstein" => Ok(Suite::Bernstein),
            "all" => Ok(Suite::All),
            other => Err(Error::invalid(format!(
                "unknown suite `{other}`; expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

/// Which side of the threshold counts as a pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub passed: bool,
}

fn at_most(name: &str, value: f64, threshold: f64) -> PropertyCheck {
    PropertyCheck {
        name: name.to_string(),
        value,
        threshold,
        direction: Direction::AtMost,
        passed: value <= threshold,
    }
}

fn at_least(name: &str, value: f64, threshold: f64) -> PropertyCheck {
    PropertyCheck {
        name: name.to_string(),
        value,
        threshold,
        direction: Direction::AtLeast,
        passed: value >= threshold,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: u32,
    pub seed: u64,
    pub properties: Vec<PropertyCheck>,
    pub passed: bool,
}

impl SuiteReport {
    fn collect(suite: Suite, trials: u32, seed: u64, properties: Vec<PropertyCheck>) -> Self {
        let passed = properties.iter().all(|p| p.passed);
        Self { suite: suite.name().to_string(), trials, seed, properties, passed }
    }
}

/// Run one suite (`All` expands to every concrete suite).
pub fn run_suites(suite: Suite, trials: u32, seed: u64) -> Result<Vec<SuiteReport>> {
    let list: Vec<Suite> = match suite {
        Suite::All => vec![Suite::Kernel, Suite::Reduction, Suite::M1, Suite::M2, Suite::Bernstein],
        one => vec![one],
    };
    list.into_iter().map(|s| run_suite(s, trials, seed)).collect()
}

pub fn run_suite(suite: Suite, trials: u32, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Kernel => kernel_suite(trials, seed),
        Suite::Reduction => reduction_suite(trials, seed),
        Suite::M1 => m1_suite(trials, seed),
        Suite::M2 => m2_suite(trials, seed),
        Suite::Bernstein => bernstein_suite(trials, seed),
        Suite::All => unreachable!("expanded by run_suites"),
    }
}

fn order(m: u32) -> BumpOrder {
    BumpOrder::new(m).expect("static order")
}

fn kernel_suite(trials: u32, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut props = Vec::new();

    let mut closed_vs_generic: f64 = 0.0;
    let mut closed_vs_quad: f64 = 0.0;
    let mut generic_vs_quad: f64 = 0.0;
    for m in 2..=4u32 {
        let closed = KernelTable::new(order(m), KernelMethod::ClosedForm)?;
        let generic = KernelTable::new(order(m), KernelMethod::GenericExact)?;
        let mut lam = 0.0;
        while lam <= PI {
            let c = closed.eval(lam);
            let g = generic.eval(lam);
            let q = quadrature_oracle(order(m), lam, 96)?;
            closed_vs_generic = closed_vs_generic.max((c - g).abs());
            closed_vs_quad = closed_vs_quad.max((c - q).abs());
            generic_vs_quad = generic_vs_quad.max((g - q).abs());
            lam += 1e-2;
        }
    }
    props.push(at_most("closed_vs_generic_abs", closed_vs_generic, 1e-10));
    props.push(at_most("closed_vs_quadrature_abs", closed_vs_quad, 1e-10));
    props.push(at_most("generic_vs_quadrature_abs", generic_vs_quad, 1e-10));

    let mut evenness: f64 = 0.0;
    for _ in 0..trials.max(100) {
        let lam = rng.random_range(-4.0..4.0);
        for m in 2..=4u32 {
            let table = KernelTable::auto(order(m))?;
            evenness = evenness.max((table.eval(lam) - table.eval(-lam)).abs());
        }
    }
    props.push(at_most("evenness_abs", evenness, 1e-14));

    let mut outside: f64 = 0.0;
    let mut min_inside = f64::INFINITY;
    for m in 2..=4u32 {
        let table = KernelTable::auto(order(m))?;
        for probe in [PI, -PI, PI + 1e-9, 5.0, -42.0] {
            outside = outside.max(table.eval(probe).abs());
        }
        let mut lam = -PI;
        while lam <= PI {
            min_inside = min_inside.min(table.eval(lam));
            lam += 1e-3;
        }
    }
    props.push(at_most("support_outside_abs", outside, 0.0));
    props.push(at_least("nonnegativity_min", min_inside, 0.0));

    let table2 = KernelTable::auto(order(2))?;
    let g0 = table2.eval(0.0);
    let mut complement: f64 = 0.0;
    let mut x = 0.0;
    while x <= PI {
        complement = complement.max((table2.eval(x) + table2.eval(PI - x) - g0).abs());
        x += 1e-3;
    }
    props.push(at_most("complement_identity_m2_abs", complement, 1e-12));

    // The complement identity is specific to order 2: for order 3 the sum at
    // x = pi/2 is 1/2, well away from g_3(0) = 3 pi / 8.
    let table3 = KernelTable::auto(order(3))?;
    let margin =
        (table3.eval(FRAC_PI_2) + table3.eval(PI - FRAC_PI_2) - table3.eval(0.0)).abs();
    props.push(at_least("complement_identity_m3_margin", margin, 0.1));

    Ok(SuiteReport::collect(Suite::Kernel, trials, seed, props))
}

fn reduction_suite(trials: u32, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut props = Vec::new();

    let mut identity_rel: f64 = 0.0;
    for _ in 0..trials {
        let m = rng.random_range(2..=4u32);
        let n = rng.random_range(1..=8usize);
        let seq = sample_gap_sequence(order(m), n, &mut rng);
        let coeffs = CoefficientVector::random(n, &mut rng);
        let report = reduction_report(&seq, &coeffs)?;
        identity_rel = identity_rel
            .max(report.identity_residual / report.defect.abs().max(1.0));
    }
    props.push(at_most("identity_residual_rel", identity_rel, 1e-9));

    let mut pointwise: f64 = 0.0;
    for m in 2..=4u32 {
        for _ in 0..100 {
            let x = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
            pointwise = pointwise.max(second_derivative_residual(order(m), x)?);
        }
    }
    props.push(at_most("second_derivative_identity_abs", pointwise, 1e-11));

    let single2 = crate::seq::GapSequence::single(order(2), 0.0)?;
    let one = CoefficientVector::from_real(&[1.0]);
    let report = reduction_report(&single2, &one)?;
    let anchor2 = (report.defect - PI).abs().max((2.0 * report.q - PI).abs());
    props.push(at_most("single_bump_anchor_m2_abs", anchor2, 1e-12));

    let single3 = crate::seq::GapSequence::single(order(3), 0.0)?;
    let report = reduction_report(&single3, &one)?;
    let anchor3 = (report.defect - 2.25 * PI).abs().max((6.0 * report.q - 2.25 * PI).abs());
    props.push(at_most("single_bump_anchor_m3_abs", anchor3, 1e-12));

    Ok(SuiteReport::collect(Suite::Reduction, trials, seed, props))
}

fn m1_suite(trials: u32, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut props = Vec::new();

    let mut equality_rel: f64 = 0.0;
    let mut gram_diag: f64 = 0.0;
    let mut gram_off: f64 = 0.0;
    let mut theta_dev: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(1..=8usize);
        let seq = sample_gap_sequence(order(1), n, &mut rng);
        let coeffs = CoefficientVector::random(n, &mut rng);
        let (norm_sq, deriv_sq) = bump_sum_norms(&seq, &coeffs)?;
        equality_rel = equality_rel.max((deriv_sq - norm_sq).abs() / norm_sq);

        let gram = crate::expsum::gram_matrices(&seq);
        for i in 0..n {
            gram_diag = gram_diag
                .max((gram.values.get(i, i) - FRAC_PI_2).abs())
                .max((gram.derivatives.get(i, i) - FRAC_PI_2).abs());
            for j in 0..n {
                if i != j {
                    gram_off = gram_off
                        .max(gram.values.get(i, j).abs())
                        .max(gram.derivatives.get(i, j).abs());
                }
            }
        }
        let (theta, _) = max_rayleigh(&seq)?;
        theta_dev = theta_dev.max((theta - 1.0).abs());
    }
    props.push(at_most("norm_equality_rel", equality_rel, 1e-10));
    props.push(at_most("gram_diagonal_abs", gram_diag, 1e-12));
    props.push(at_most("gram_offdiagonal_abs", gram_off, 1e-12));
    props.push(at_most("rayleigh_unity_abs", theta_dev, 1e-10));

    Ok(SuiteReport::collect(Suite::M1, trials, seed, props))
}

fn m2_suite(trials: u32, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut props = Vec::new();
    let table = KernelTable::auto(order(2))?;
    let g0 = table.eval(0.0);

    let mut defect_dip: f64 = 0.0;
    let mut eig_dip: f64 = 0.0;
    let mut split_residual: f64 = 0.0;
    let mut split_dip: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(1..=8usize);
        let seq = sample_gap_sequence(order(2), n, &mut rng);
        let coeffs = CoefficientVector::random(n, &mut rng);
        let (norm_sq, _) = bump_sum_norms(&seq, &coeffs)?;
        let d = defect(&seq, &coeffs)?;
        defect_dip = defect_dip.max(-d / (4.0 * norm_sq));

        let report = reduction_report(&seq, &coeffs)?;
        eig_dip = eig_dip.max(-report.min_eigenvalue / g0);

        let split = decompose_m2(&seq, &coeffs)?;
        split_residual = split_residual.max(split.residual / report.q.abs().max(1.0));
        let scale: f64 =
            g0 * coeffs.values().iter().map(Complex64::norm_sqr).sum::<f64>().max(1e-12);
        split_dip = split_dip.max((-split.pair_sum.min(split.diag_sum)) / scale);
    }
    props.push(at_most("defect_dip_rel", defect_dip, 1e-10));
    props.push(at_most("kernel_gram_eig_dip_rel", eig_dip, 1e-10));
    props.push(at_most("split_residual_rel", split_residual, 1e-10));
    props.push(at_most("split_parts_dip_rel", split_dip, 1e-12));

    let mut region_min = f64::INFINITY;
    for _ in 0..200 {
        let a = rng.random_range(0.0..2.0 * PI);
        let b = rng.random_range((PI - a).max(0.0)..2.0 * PI);
        region_min = region_min.min(kernel_pair_deficit(a, b)?);
    }
    props.push(at_least("pair_bound_region_min", region_min, -1e-12));

    let mut line_abs: f64 = 0.0;
    for _ in 0..200 {
        let a = rng.random_range(0.0..PI);
        line_abs = line_abs.max(kernel_pair_deficit(a, PI - a)?.abs());
    }
    props.push(at_most("pair_bound_equality_line_abs", line_abs, 1e-12));

    Ok(SuiteReport::collect(Suite::M2, trials, seed, props))
}

fn bernstein_suite(trials: u32, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut props = Vec::new();

    let mut violation: f64 = f64::NEG_INFINITY;
    let mut extreme_dev: f64 = 0.0;
    let mut sin_dev: f64 = 0.0;
    for m in 1..=8u32 {
        for _ in 0..trials {
            let t = TrigPolynomial::random(m, &mut rng)?;
            let (norm_sq, deriv_sq) = t.parseval_norms();
            violation = violation.max((deriv_sq - f64::from(m * m) * norm_sq) / norm_sq);
        }
        let mode = TrigPolynomial::mode(m, i64::from(m))?;
        let (norm_sq, deriv_sq) = mode.parseval_norms();
        extreme_dev =
            extreme_dev.max((deriv_sq - f64::from(m * m) * norm_sq).abs() / deriv_sq);

        let sin_pow = TrigPolynomial::sin_power(m)?;
        let (norm_sq, deriv_sq) = sin_pow.parseval_norms();
        let expected = f64::from(m * m) / f64::from(2 * m - 1);
        sin_dev = sin_dev.max((deriv_sq / norm_sq - expected).abs() / expected);
    }
    props.push(at_most("derivative_bound_violation_rel", violation, 1e-12));
    props.push(at_most("extreme_mode_equality_rel", extreme_dev, 1e-14));
    props.push(at_most("sin_power_ratio_rel", sin_dev, 1e-10));

    let mut bump_ratio_dev: f64 = 0.0;
    let one = CoefficientVector::from_real(&[1.0]);
    for m in 1..=6u32 {
        let seq = crate::seq::GapSequence::single(order(m), 0.0)?;
        let (norm_sq, deriv_sq) = bump_sum_norms(&seq, &one)?;
        let expected = f64::from(m * m) / f64::from(2 * m - 1);
        bump_ratio_dev = bump_ratio_dev.max((deriv_sq / norm_sq - expected).abs() / expected);
    }
    props.push(at_most("single_bump_ratio_rel", bump_ratio_dev, 1e-10));

    let rule = GaussLegendre::new(256)?;
    let mut parseval_dev: f64 = 0.0;
    for m in 1..=6u32 {
        for _ in 0..trials.min(20) {
            let t = TrigPolynomial::random(m, &mut rng)?;
            let (norm_sq, deriv_sq) = t.parseval_norms();
            let norm_q = rule.integrate(-PI, PI, |x| t.eval(x).norm_sqr());
            let deriv_q = rule.integrate(-PI, PI, |x| {
                t.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let k = idx as i64 - i64::from(m);
                        c * Complex64::new(0.0, k as f64) * Complex64::cis(k as f64 * x)
                    })
                    .sum::<Complex64>()
                    .norm_sqr()
            });
            parseval_dev = parseval_dev
                .max((norm_sq - norm_q).abs() / norm_q)
                .max((deriv_sq - deriv_q).abs() / deriv_q.max(1e-12));
        }
    }
    props.push(at_most("parseval_vs_quadrature_rel", parseval_dev, 1e-9));

    Ok(SuiteReport::collect(Suite::Bernstein, trials, seed, props))
}
