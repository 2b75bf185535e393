//! Small dense least-squares helpers shared by the regression forecasters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on `|R_ii| / ||a_i||` below which a column is treated as
/// linearly dependent on the preceding ones.
const RANK_TOL: f64 = 1e-9;

/// Dot product with four independent accumulators.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Solves `min ||A b - y||` where `A` is given column by column.
///
/// Returns [`Error::RankDeficient`] when a column is (numerically) a linear
/// combination of the columns before it.
pub fn least_squares(columns: &[&[f64]], y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let k = columns.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if n < k {
        return Err(Error::RankDeficient);
    }
    for c in columns {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: c.len(),
            });
        }
    }
    let a = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let qr = a.qr();
    let r = qr.r();
    for j in 0..k {
        if norms[j] == 0.0 || r[(j, j)].abs() <= RANK_TOL * norms[j] {
            return Err(Error::RankDeficient);
        }
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let sol = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient)?;
    Ok(sol.iter().copied().collect())
}

/// Solves the symmetric positive definite system `G x = rhs` (row-major `k x k`)
/// by Cholesky after diagonal equilibration. Returns `None` if `G` is not
/// numerically positive definite.
pub fn solve_spd(gram: &[f64], rhs: &[f64], k: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(gram.len(), k * k);
    let scale: Vec<f64> = (0..k)
        .map(|i| {
            let d = gram[i * k + i];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    if scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return None;
    }
    let g = DMatrix::from_fn(k, k, |i, j| gram[i * k + j] * scale[i] * scale[j]);
    let chol = g.cholesky()?;
    let l = chol.l();
    if (0..k).any(|i| l[(i, i)] < 1e-7) {
        return None;
    }
    let b = DVector::from_iterator(k, (0..k).map(|i| rhs[i] * scale[i]));
    let x = chol.solve(&b);
    Some((0..k).map(|i| x[i] * scale[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_handles_remainders() {
        for n in 0..11 {
            let a: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
            let b: Vec<f64> = (0..n).map(|i| 2.0 - i as f64).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert_eq!(dot(&a, &b), naive, "n = {n}");
        }
    }

    #[test]
    fn exact_line() {
        let ones = [1.0; 4];
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let b = least_squares(&[&ones, &x], &y).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!((b[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert_eq!(least_squares(&[&x, &x], &y), Err(Error::RankDeficient));
    }

    #[test]
    fn spd_solve_matches_direct() {
        let g = [4.0, 2.0, 2.0, 3.0];
        let x = solve_spd(&g, &[2.0, 1.0], 2).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
        assert!(solve_spd(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0], 2).is_none());
    }
}
