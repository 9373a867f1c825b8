//! Small dense-matrix helpers shared across modules.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix as stored in JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DMatrix<f64>> for DenseJson {
    fn from(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter().copied());
        }
        DenseJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<&DenseJson> for DMatrix<f64> {
    type Error = Error;

    fn try_from(d: &DenseJson) -> Result<Self> {
        if d.data.len() != d.rows * d.cols {
            return Err(Error::DimensionMismatch {
                expected: d.rows * d.cols,
                got: d.data.len(),
            });
        }
        Ok(DMatrix::from_row_slice(d.rows, d.cols, &d.data))
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
///
/// Computed by one-sided Jacobi rotations, which keep small singular values
/// accurate to working precision. nalgebra's bidiagonal SVD loses about 1e-3
/// relative accuracy on some small matrices with repeated singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// m x k with k = min(m, n); zero columns for zero singular values.
    pub u: DMatrix<f64>,
    /// Length k, descending.
    pub s: Vec<f64>,
    /// n x k
    pub v: DMatrix<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Svd {
        if a.nrows() < a.ncols() {
            let t = Svd::new(&a.transpose());
            return Svd { u: t.v, s: t.s, v: t.u };
        }
        let n = a.ncols();
        let mut u = a.clone();
        let mut v = DMatrix::<f64>::identity(n, n);
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = u.column(p).norm_squared();
                    let beta = u.column(q).norm_squared();
                    let gamma = u.column(p).dot(&u.column(q));
                    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = c * t;
                    for m in [&mut u, &mut v] {
                        for i in 0..m.nrows() {
                            let (x, y) = (m[(i, p)], m[(i, q)]);
                            m[(i, p)] = c * x - sn * y;
                            m[(i, q)] = sn * x + c * y;
                        }
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let norms: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
        order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
        let mut uu = DMatrix::zeros(u.nrows(), n);
        let mut vv = DMatrix::zeros(n, n);
        for (k, &j) in order.iter().enumerate() {
            if norms[j] > 0.0 {
                uu.set_column(k, &(u.column(j) / norms[j]));
            }
            vv.set_column(k, &v.column(j));
        }
        Svd {
            u: uu,
            s: order.iter().map(|&j| norms[j]).collect(),
            v: vv,
        }
    }

    /// Least-squares solution of `A x = b`, ignoring singular values at or
    /// below `rtol * s_max`.
    pub fn solve(&self, b: &DMatrix<f64>, rtol: f64) -> Result<DMatrix<f64>> {
        if b.nrows() != self.u.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.u.nrows(),
                got: b.nrows(),
            });
        }
        let cut = rtol * self.s.first().copied().unwrap_or(0.0);
        let mut coef = self.u.transpose() * b;
        for (k, &s) in self.s.iter().enumerate() {
            let scale = if s > cut && s > 0.0 { 1.0 / s } else { 0.0 };
            coef.row_mut(k).scale_mut(scale);
        }
        Ok(&self.v * coef)
    }
}

/// Smallest singular value; `0` for an empty matrix.
pub fn sigma_min(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    Svd::new(m).s.last().copied().unwrap_or(0.0)
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    Svd::new(m).s
}
