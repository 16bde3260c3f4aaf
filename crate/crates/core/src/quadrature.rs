//! Gauss-Legendre quadrature.
//!
//! Serves as the independent numerical-integration oracle against which the
//! analytic integration paths are cross-checked. Nodes and weights come from
//! Newton iteration on the Legendre recurrence, accurate to machine
//! precision for the rule sizes used here.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Minimum rule size accepted by [`GaussLegendre::new`].
pub const MIN_NODES: usize = 16;

/// A Gauss-Legendre rule on `[-1, 1]`, mapped affinely to arbitrary intervals.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::TooFewNodes { min: MIN_NODES, got: n });
        }
        Ok(Self::with_nodes_unchecked(n))
    }

    fn with_nodes_unchecked(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess for the i-th root counted from +1.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..64 {
                let (p, d) = legendre_with_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[a, b]`. Degenerate or reversed intervals give 0.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    debug_assert!(n >= 1);
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    let deriv = if (x * x - 1.0).abs() < f64::EPSILON {
        // Only hit at the interval ends, which are never roots.
        0.5 * (n * (n + 1)) as f64 * x.signum()
    } else {
        n as f64 * (x * cur - prev) / (x * x - 1.0)
    };
    (cur, deriv)
}
