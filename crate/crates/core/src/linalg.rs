//! Dense symmetric matrices and the small-scale eigenmachinery the rest of
//! the crate needs: Jacobi rotations for symmetric eigenvalues, Cholesky for
//! the positive-definite side of the generalized problem.
//!
//! Everything here targets the tiny matrices (a handful of bumps) that gap
//! sequences produce; per-call workspaces, no shared state.

use crate::error::{Error, Result};
use num_complex::Complex64;

const MAX_SWEEPS: usize = 64;

/// Dense real symmetric matrix, full row-major storage. Symmetry is an
/// invariant: every constructor either fills both triangles from one value
/// or validates the input.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from `f(i, j)` evaluated only for `i <= j`; the lower triangle
    /// mirrors the upper exactly.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Validate an explicit row-major matrix: square, and symmetric within
    /// an absolute `1e-12`. Stored entries are the averaged pair, so the
    /// invariant holds exactly afterwards.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: i, cols: row.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (rows[i][j] - rows[j][i]).abs();
                if diff > 1e-12 {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Hermitian form `x* M x`; real up to rounding for symmetric `M`.
    pub fn hermitian_form(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                acc += x[i].conj() * self.get(i, j) * x[j];
            }
        }
        acc
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.jacobi_eigen()?.values)
    }

    /// Smallest eigenvalue via Jacobi rotations.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = self.jacobi_eigen()?;
        Ok(eig.values[0])
    }

    /// Full symmetric eigendecomposition by cyclic Jacobi sweeps. Converged
    /// when the off-diagonal Frobenius norm drops below `1e-12` times the
    /// Frobenius norm of the input.
    pub fn jacobi_eigen(&self) -> Result<SymEigen> {
        let n = self.n;
        if n == 0 {
            return Ok(SymEigen { values: vec![], vectors: vec![] });
        }
        let mut a = self.data.clone();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        let tol = 1e-12 * self.frobenius();
        let mut converged = off_frobenius(&a, n) <= tol;
        for _ in 0..MAX_SWEEPS {
            if converged {
                break;
            }
            for p in 0..n.saturating_sub(1) {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    a[p * n + p] -= h;
                    a[q * n + q] += h;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        a[r * n + p] = new_rp;
                        a[p * n + r] = new_rp;
                        a[r * n + q] = new_rq;
                        a[q * n + r] = new_rq;
                    }
                    for r in 0..n {
                        let vrp = v[r * n + p];
                        let vrq = v[r * n + q];
                        v[r * n + p] = vrp - s * (vrq + tau * vrp);
                        v[r * n + q] = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
            converged = off_frobenius(&a, n) <= tol;
        }
        if !converged {
            return Err(Error::EigenNoConvergence);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
        let values = order.iter().map(|&i| a[i * n + i]).collect();
        let vectors = order
            .iter()
            .map(|&col| (0..n).map(|r| v[r * n + col]).collect())
            .collect();
        Ok(SymEigen { values, vectors })
    }

    /// Cholesky factor `L` with `M = L L^T`; fails on non-positive pivots.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }
}

fn off_frobenius(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j] * a[i * n + j];
            }
        }
    }
    acc.sqrt()
}

/// Eigenvalues ascending with matching unit eigenvectors (`vectors[k]` pairs
/// with `values[k]`).
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Lower-triangular Cholesky factor.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Solve `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// Solve `L^T x = b`.
    pub fn solve_lower_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }
}

/// Largest eigenvalue `theta` and eigenvector `x` of `A x = theta B x` for
/// symmetric `A` and positive-definite `B`.
///
/// The problem is reduced to a standard symmetric one through the Cholesky
/// factor of `B`; the returned vector is normalized so `x^T B x = 1` and the
/// pair is rejected if `|| A x - theta B x ||` exceeds
/// `1e-8 * ||A||_F * ||x||`.
pub fn max_generalized_eigenpair(a: &SymMatrix, b: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    assert_eq!(a.dim(), b.dim());
    let n = a.dim();
    let chol = b.cholesky()?;

    // X = L^{-1} A, column by column.
    let mut x = vec![0.0; n * n];
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| a.get(i, j)).collect();
        let sol = chol.solve_lower(&col);
        for i in 0..n {
            x[i * n + j] = sol[i];
        }
    }
    // C = X L^{-T}; computed through C^T = L^{-1} X^T, then symmetrized to
    // absorb rounding.
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| x[i * n + j]).collect();
        let sol = chol.solve_lower(&row);
        for j in 0..n {
            c[j * n + i] = sol[j];
        }
    }
    let sym = SymMatrix::from_fn(n, |i, j| 0.5 * (c[i * n + j] + c[j * n + i]));
    let eig = sym.jacobi_eigen()?;
    let theta = *eig.values.last().expect("non-empty spectrum");
    let y = eig.vectors.last().expect("non-empty spectrum");
    let mut vec = chol.solve_lower_transpose(y);

    let bx = b.mul_vec(&vec);
    let quad: f64 = vec.iter().zip(&bx).map(|(p, q)| p * q).sum();
    let scale = quad.sqrt();
    if scale > 0.0 {
        for v in &mut vec {
            *v /= scale;
        }
    }

    let av = a.mul_vec(&vec);
    let bv = b.mul_vec(&vec);
    let residual = av
        .iter()
        .zip(&bv)
        .map(|(&p, &q)| (p - theta * q).powi(2))
        .sum::<f64>()
        .sqrt();
    let x_norm = vec.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tolerance = 1e-8 * a.frobenius().max(f64::MIN_POSITIVE) * x_norm;
    if residual > tolerance {
        return Err(Error::EigenResidual { residual, tolerance });
    }
    Ok((theta, vec))
}
