//! Householder QR, with optional column pivoting and early termination.

use nalgebra::DMatrix;

/// Result of a Householder factorization `A P = Q R`.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Square orthonormal factor (rows x rows).
    pub q: DMatrix<f64>,
    /// Upper-trapezoidal factor, columns in pivot order. Rows beyond `rank`
    /// hold the unreduced trailing block when the factorization stopped early.
    pub r: DMatrix<f64>,
    /// `permutation[k]` is the original column placed at position `k`.
    pub permutation: Vec<usize>,
    /// Number of reflectors applied.
    pub rank: usize,
}

/// Column-pivoted QR that stops as soon as the next pivot's magnitude drops
/// below `rank_tol` times the first pivot's magnitude.
///
/// Column norms are recomputed from the trailing block at every step instead
/// of being downdated, so the stopping test is exact even for tiny residuals.
pub fn pivoted_qr(a: &DMatrix<f64>, rank_tol: f64) -> HouseholderQr {
    factor(a, Some(rank_tol))
}

/// Unpivoted Householder QR with a full square `Q`.
pub fn householder_qr(a: &DMatrix<f64>) -> HouseholderQr {
    factor(a, None)
}

fn factor(a: &DMatrix<f64>, pivot_tol: Option<f64>) -> HouseholderQr {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut permutation: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    let mut first_pivot = None;

    for i in 0..m.min(n) {
        if let Some(tol) = pivot_tol {
            let mut best = i;
            let mut best_norm = -1.0;
            for j in i..n {
                let norm2: f64 = r.view((i, j), (m - i, 1)).iter().map(|v| v * v).sum();
                if norm2 > best_norm {
                    best_norm = norm2;
                    best = j;
                }
            }
            let norm = best_norm.sqrt();
            let first = *first_pivot.get_or_insert(norm);
            if norm == 0.0 || norm < tol * first {
                break;
            }
            if best != i {
                r.swap_columns(i, best);
                permutation.swap(i, best);
            }
        }

        let x: Vec<f64> = r.view((i, i), (m - i, 1)).iter().copied().collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            // nothing to annihilate; identity reflector keeps the count aligned
            reflectors.push((i, vec![0.0; m - i], 0.0));
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        let beta = 2.0 / vtv;
        apply_reflector(&mut r, i, &v, beta, i);
        r[(i, i)] = alpha;
        for k in i + 1..m {
            r[(k, i)] = 0.0;
        }
        reflectors.push((i, v, beta));
    }

    let rank = reflectors.len();
    let mut q = DMatrix::<f64>::identity(m, m);
    for (i, v, beta) in reflectors.iter().rev() {
        if *beta != 0.0 {
            apply_reflector(&mut q, *i, v, *beta, 0);
        }
    }

    // positive diagonal on R
    for i in 0..rank {
        if r[(i, i)] < 0.0 {
            for j in 0..n {
                r[(i, j)] = -r[(i, j)];
            }
            for k in 0..m {
                q[(k, i)] = -q[(k, i)];
            }
        }
    }

    HouseholderQr {
        q,
        r,
        permutation,
        rank,
    }
}

/// Applies `I - beta v vᵀ` to rows `offset..` of `mat`, columns `col_start..`.
fn apply_reflector(mat: &mut DMatrix<f64>, offset: usize, v: &[f64], beta: f64, col_start: usize) {
    for j in col_start..mat.ncols() {
        let mut dot = 0.0;
        for (k, vk) in v.iter().enumerate() {
            dot += vk * mat[(offset + k, j)];
        }
        if dot == 0.0 {
            continue;
        }
        let s = beta * dot;
        for (k, vk) in v.iter().enumerate() {
            mat[(offset + k, j)] -= s * vk;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    #[test]
    fn reconstructs_and_is_orthonormal() {
        let a = DMatrix::from_fn(5, 7, |i, j| {
            ((i * 7 + j) as f64 * 0.37).sin() + (i as f64 - j as f64) * 0.1
        });
        let qr = householder_qr(&a);
        assert_eq!(qr.rank, 5);
        let qtq = qr.q.transpose() * &qr.q;
        assert!(max_abs(&(qtq - DMatrix::identity(5, 5))) < 1e-14);
        assert!(max_abs(&(&qr.q * &qr.r - &a)) < 1e-13);
        for i in 0..5 {
            assert!(qr.r[(i, i)] >= 0.0);
            for j in 0..i {
                assert_eq!(qr.r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn pivoting_detects_rank() {
        let u = DMatrix::from_column_slice(4, 2, &[1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 3.0, 1.0]);
        let v = DMatrix::from_fn(2, 9, |i, j| ((i + 2 * j) as f64).cos());
        let a = &u * &v;
        let qr = pivoted_qr(&a, 1e-10);
        assert_eq!(qr.rank, 2);
        let mut diag: Vec<f64> = (0..2).map(|i| qr.r[(i, i)]).collect();
        diag.dedup();
        assert!(diag[0] >= diag[1]);
        let ap = a.select_columns(&qr.permutation);
        let approx = qr.q.columns(0, 2) * qr.r.rows(0, 2);
        assert!(max_abs(&(approx - ap)) < 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let qr = pivoted_qr(&DMatrix::zeros(3, 4), 1e-10);
        assert_eq!(qr.rank, 0);
    }
}
