//! Exact L2 machinery for gap-constrained combinations of cosine bumps.
//!
//! The object of study is the truncated cosine bump `H(x)` (equal to
//! `cos x` on `[-pi/2, pi/2]`, zero outside), its powers `H^M`, and
//! combinations
//!
//! ```text
//! G(x) = sum_n a_n H^M(x + shift_n)
//! ```
//!
//! whose shifts satisfy the gap condition `shift_{n+M} - shift_n >= pi`.
//! The conjectured bound `||G'||_2 <= M ||G||_2` extends the classical
//! derivative inequality for trigonometric polynomials; it is a theorem for
//! `M = 1` (with equality) and `M = 2`, and open for `M >= 3`. This crate
//! makes the whole setup computable:
//!
//! - [`expsum`] integrates everything exactly: bumps, combinations and
//!   their derivatives live in a closed class of piecewise exponential
//!   sums, so norms and Gram matrices are analytic, not quadrature-based.
//! - [`kernel`] evaluates the correlation kernel `g_M` three independent
//!   ways (closed forms for `M = 2, 3, 4`, generic exact integration, and
//!   a Gauss-Legendre oracle).
//! - [`quadform`] reduces the bound to the kernel quadratic form via the
//!   defect identity `M^2 ||G||^2 - ||G'||^2 = M(M-1) Q` and carries the
//!   order-2 positivity proof pieces (pair/diagonal split, kernel pair
//!   bound).
//! - [`search`] hunts for counterexamples in the open cases by maximizing
//!   Rayleigh ratios and minimizing kernel-Gram eigenvalues over gap-valid
//!   sequences.
//! - [`verify`] packages the whole battery as named, seeded suites.
//!
//! ```
//! use bumpgap::{BumpOrder, CoefficientVector, GapSequence};
//!
//! // Two order-2 bumps half a period apart: the defect stays nonnegative.
//! let order = BumpOrder::new(2)?;
//! let seq = GapSequence::new(order, vec![0.0, std::f64::consts::FRAC_PI_2])?;
//! let coeffs = CoefficientVector::from_real(&[1.0, -1.0]);
//! let defect = bumpgap::defect(&seq, &coeffs)?;
//! assert!(defect >= 0.0);
//! # Ok::<(), bumpgap::Error>(())
//! ```

pub mod bump;
pub mod error;
pub mod expsum;
pub mod kernel;
pub mod linalg;
pub mod quadform;
pub mod quadrature;
pub mod search;
pub mod seq;
pub mod trigpoly;
pub mod verify;

pub use bump::BumpOrder;
pub use error::{Error, Result};
pub use expsum::{bump_sum, bump_sum_norms, expand_bump, gram_matrices, GramMatrices, PiecewiseExpSum};
pub use kernel::{quadrature_oracle, KernelMethod, KernelTable};
pub use linalg::{max_generalized_eigenpair, SymMatrix};
pub use quadform::{
    decompose_m2, defect, kernel_gram, kernel_pair_deficit, quad_form, reduction_report,
    second_derivative_residual, M2Split, QuadFormReport,
};
pub use quadrature::GaussLegendre;
pub use search::{
    local_refine, max_rayleigh, sample_gap_sequence, search_counterexample, witness_ratio,
    Objective, SearchConfig, SearchReport,
};
pub use seq::{CoefficientVector, GapSequence};
pub use trigpoly::TrigPolynomial;
pub use verify::{run_suite, run_suites, Suite, SuiteReport};
