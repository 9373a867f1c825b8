use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::qr::{householder_qr, pivoted_qr};
use crate::error::{Error, Result};
use crate::matrix::DenseJson;

/// Default relative pivot magnitude below which columns count as dependent.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Data-driven graph Fourier operator of one node-by-time matrix.
///
/// The maximally independent columns `X[:, M]` factor as `Q R`; `Q` is
/// completed to a square orthonormal basis `F` and the transform is
/// `F⁻¹ = Fᵀ`. Signals in the span of `X[:, M]` only occupy the first `rank`
/// rows of the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct GftOperator {
    /// N x N, the inverse (transpose) of the completed basis.
    pub f_inv: DMatrix<f64>,
    /// N x r, orthonormal columns spanning `X[:, M]`.
    pub q: DMatrix<f64>,
    /// r x r upper-triangular factor of `X[:, M]`.
    pub r_factor: DMatrix<f64>,
    pub rank: usize,
    /// Transform rows carrying the signal, `0..rank`.
    pub band_support: Vec<usize>,
    /// Maximally independent column subscripts of X, ascending.
    pub pivot_columns: Vec<usize>,
    pub rank_tol: f64,
}

impl GftOperator {
    pub fn nodes(&self) -> usize {
        self.f_inv.nrows()
    }

    /// `F[:, R]`, the in-band part of the basis (N x r).
    pub fn band_basis(&self) -> DMatrix<f64> {
        self.f_inv.transpose().select_columns(&self.band_support)
    }

    /// GFT response `F⁻¹ x`.
    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        &self.f_inv * x
    }
}

/// Builds the operator from the columns a rank-revealing QR of `x` selects.
pub fn build_gft_operator(x: &DMatrix<f64>, rank_tol: f64) -> Result<GftOperator> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("data matrix is empty".into()));
    }
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rank_tol must lie in (0, 1), got {rank_tol}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let pivoted = pivoted_qr(x, rank_tol);
    let rank = pivoted.rank;
    if rank == 0 {
        return Err(Error::RankZero);
    }
    let mut pivot_columns = pivoted.permutation[..rank].to_vec();
    pivot_columns.sort_unstable();

    let independent = x.select_columns(&pivot_columns);
    let qr = householder_qr(&independent);
    Ok(GftOperator {
        f_inv: qr.q.transpose(),
        q: qr.q.columns(0, rank).into_owned(),
        r_factor: qr.r.view((0, 0), (rank, rank)).into_owned(),
        rank,
        band_support: (0..rank).collect(),
        pivot_columns,
        rank_tol,
    })
}

/// JSON form: row-major matrices, sorted index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GftOperatorJson {
    pub rank_tol: f64,
    pub rank: usize,
    pub f_inv: DenseJson,
    pub q: DenseJson,
    pub r_factor: DenseJson,
    pub band_support: Vec<usize>,
    pub pivot_columns: Vec<usize>,
}

impl From<&GftOperator> for GftOperatorJson {
    fn from(op: &GftOperator) -> Self {
        GftOperatorJson {
            rank_tol: op.rank_tol,
            rank: op.rank,
            f_inv: (&op.f_inv).into(),
            q: (&op.q).into(),
            r_factor: (&op.r_factor).into(),
            band_support: op.band_support.clone(),
            pivot_columns: op.pivot_columns.clone(),
        }
    }
}

impl TryFrom<&GftOperatorJson> for GftOperator {
    type Error = Error;

    fn try_from(j: &GftOperatorJson) -> Result<Self> {
        let op = GftOperator {
            f_inv: (&j.f_inv).try_into()?,
            q: (&j.q).try_into()?,
            r_factor: (&j.r_factor).try_into()?,
            rank: j.rank,
            band_support: j.band_support.clone(),
            pivot_columns: j.pivot_columns.clone(),
            rank_tol: j.rank_tol,
        };
        if op.band_support.len() != op.rank || op.pivot_columns.len() != op.rank || op.q.ncols() != op.rank {
            return Err(Error::InvalidArgument(
                "operator rank disagrees with its index sets".into(),
            ));
        }
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::singular_values;

    fn row_norms(m: &DMatrix<f64>) -> Vec<f64> {
        (0..m.nrows()).map(|i| m.row(i).norm()).collect()
    }

    #[test]
    fn stacked_identity_is_full_rank() {
        let x = DMatrix::from_fn(3, 6, |i, j| if i == j % 3 { 1.0 } else { 0.0 });
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(op.rank, 3);
        let nonzero = row_norms(&op.transform(&x)).iter().filter(|&&n| n > 1e-12).count();
        assert_eq!(nonzero, 3);
    }

    #[test]
    fn outer_product_is_rank_one() {
        let u = DMatrix::from_column_slice(4, 1, &[1.0, -2.0, 0.5, 3.0]);
        let v = DMatrix::from_row_slice(1, 6, &[0.3, 1.0, -1.0, 2.0, 0.0, 0.7]);
        let x = &u * &v;
        // SVD oracle: exactly one non-negligible singular value
        let sv = singular_values(&x);
        assert!(sv[1] < 1e-12 * sv[0]);
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(op.rank, 1);
        let tol = 1e-10 * x.norm();
        let norms = row_norms(&op.transform(&x));
        assert_eq!(norms.iter().filter(|&&n| n > tol).count(), 1);
        assert_eq!(norms.iter().filter(|&&n| n < tol).count(), 3);
    }

    #[test]
    fn invariants_hold() {
        let a = DMatrix::from_fn(6, 2, |i, j| ((i * 3 + j) as f64 * 1.3).sin());
        let b = DMatrix::from_fn(2, 10, |i, j| ((i * 11 + j) as f64 * 0.7).cos());
        let x = &a * &b;
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(op.rank, 2);
        assert_eq!(op.band_support.len(), op.rank);
        assert_eq!(op.pivot_columns.len(), op.rank);
        let qtq = op.q.transpose() * &op.q;
        assert!((qtq - DMatrix::identity(2, 2)).abs().max() < 1e-10);
        let xm = x.select_columns(&op.pivot_columns);
        assert!((&op.q * &op.r_factor - xm).abs().max() < 1e-12);
        let resp = op.transform(&x);
        for i in 2..6 {
            assert!(resp.row(i).norm() < 1e-8 * x.norm());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_gft_operator(&DMatrix::zeros(3, 3), 1e-10),
            Err(Error::RankZero)
        ));
        let mut x = DMatrix::identity(2, 2);
        x[(0, 1)] = f64::NAN;
        assert!(matches!(build_gft_operator(&x, 1e-10), Err(Error::NonFinite)));
        assert!(build_gft_operator(&DMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let x = DMatrix::from_fn(4, 5, |i, j| ((i + j * j) as f64).sin());
        let op = build_gft_operator(&x, DEFAULT_RANK_TOL).unwrap();
        let text = serde_json::to_string(&GftOperatorJson::from(&op)).unwrap();
        let back: GftOperatorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(GftOperator::try_from(&back).unwrap(), op);
    }
}
