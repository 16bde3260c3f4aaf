use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("bump order must be at least {min}, got {got}")]
    OrderTooSmall { min: u32, got: u32 },

    #[error("input `{name}` must be finite")]
    NonFinite { name: &'static str },

    #[error("shifts must be strictly increasing: shifts[{index}] >= shifts[{next}]", next = index + 1)]
    NotIncreasing { index: usize },

    #[error("gap condition violated: shifts[{upper}] - shifts[{lower}] = {gap} < pi")]
    GapTooSmall { lower: usize, upper: usize, gap: f64 },

    #[error("coefficient count {coeffs} does not match shift count {shifts}")]
    LengthMismatch { coeffs: usize, shifts: usize },

    #[error("closed-form kernel is only available for orders 2, 3 and 4, got {0}")]
    NoClosedForm(u32),

    #[error("quadrature rule needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("matrix must be square: row {row} has {cols} entries, expected {expected}")]
    NotSquare { row: usize, cols: usize, expected: usize },

    #[error("matrix is not symmetric: entries ({i},{j}) and ({j},{i}) differ by {diff}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("matrix is not positive definite (factorization failed at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("eigenvalue iteration failed to converge")]
    EigenNoConvergence,

    #[error("generalized eigenpair residual {residual} exceeds tolerance {tolerance}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
