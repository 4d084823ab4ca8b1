//! Small dense linear algebra helpers.
//!
//! Every system in this crate is tiny (2x2 up to 4x4 after reduction), so a
//! plain row-major `Vec<Vec<f64>>` with Gaussian elimination is all that is
//! needed. No external solver dependency.

use crate::error::{Error, Result};

pub(crate) type Matrix = Vec<Vec<f64>>;

pub(crate) fn transpose(a: &[Vec<f64>]) -> Matrix {
    let rows = a.len();
    let cols = a[0].len();
    let mut out = vec![vec![0.0; rows]; cols];
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

pub(crate) fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    debug_assert!(a.iter().all(|r| r.len() == k));
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub(crate) fn row_times_mat(row: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    debug_assert_eq!(row.len(), m.len());
    let cols = m[0].len();
    let mut out = vec![0.0; cols];
    for (x, mrow) in row.iter().zip(m.iter()) {
        for (o, v) in out.iter_mut().zip(mrow.iter()) {
            *o += x * v;
        }
    }
    out
}

/// Solve `A X = B` for square `A` by Gaussian elimination with partial
/// pivoting. `B` may have any number of columns.
pub(crate) fn solve(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Matrix> {
    let n = a.len();
    debug_assert!(a.iter().all(|r| r.len() == n));
    debug_assert_eq!(b.len(), n);
    let cols = b[0].len();

    let mut aug: Matrix = a
        .iter()
        .zip(b.iter())
        .map(|(ar, br)| ar.iter().chain(br.iter()).copied().collect())
        .collect();

    let scale = aug
        .iter()
        .flat_map(|r| r.iter().take(n))
        .fold(0.0f64, |acc, v| acc.max(v.abs()));

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        if aug[pivot_row][col].abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate(format!(
                "singular linear system (pivot {col} vanished)"
            )));
        }
        aug.swap(col, pivot_row);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = aug[row][col] / aug[col][col];
            if factor != 0.0 {
                let (pivot, target) = if row < col {
                    let (lo, hi) = aug.split_at_mut(col);
                    (&hi[0], &mut lo[row])
                } else {
                    let (lo, hi) = aug.split_at_mut(row);
                    (&lo[col], &mut hi[0])
                };
                for j in col..n + cols {
                    target[j] -= factor * pivot[j];
                }
            }
        }
    }

    let mut x = vec![vec![0.0; cols]; n];
    for i in 0..n {
        for j in 0..cols {
            x[i][j] = aug[i][n + j] / aug[i][i];
        }
    }
    Ok(x)
}

/// Condition number of a symmetric positive semi-definite 2x2 matrix via its
/// eigenvalues. Returns `f64::INFINITY` when the smaller eigenvalue is not
/// strictly positive.
pub(crate) fn cond_sym2(m: &[Vec<f64>]) -> f64 {
    debug_assert_eq!(m.len(), 2);
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let tr = a + c;
    let det = a * c - b * b;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lo = 0.5 * (tr - disc);
    let hi = 0.5 * (tr + disc);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
