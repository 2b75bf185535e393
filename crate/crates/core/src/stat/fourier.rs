use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Fourier seasonal regressors as `2K` columns of `length` rows.
///
/// Column `2(j-1)` holds `sin(2πjt/m)` and column `2(j-1)+1` holds
/// `cos(2πjt/m)` for `t = t_start .. t_start + length`.
pub fn fourier_terms(t_start: usize, length: usize, m: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 || 2 * k >= m {
        return Err(Error::KTooLarge { k, m });
    }
    let mut cols = Vec::with_capacity(2 * k);
    for j in 1..=k {
        let (mut s, mut c) = (Vec::with_capacity(length), Vec::with_capacity(length));
        for t in t_start..t_start + length {
            // reduce the phase modulo m to keep arguments small for long series
            let phase = TAU * ((j * t) % m) as f64 / m as f64;
            s.push(phase.sin());
            c.push(phase.cos());
        }
        cols.push(s);
        cols.push(c);
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rows() {
        let f = fourier_terms(0, 1, 24, 1).unwrap();
        assert_eq!((f[0][0], f[1][0]), (0.0, 1.0));
        let f = fourier_terms(6, 1, 24, 1).unwrap();
        assert!((f[0][0] - 1.0).abs() < 1e-12 && f[1][0].abs() < 1e-12);
    }

    #[test]
    fn orthogonal_over_a_period() {
        let f = fourier_terms(5, 24, 24, 3).unwrap();
        for a in 0..f.len() {
            for b in 0..a {
                let dot: f64 = f[a].iter().zip(&f[b]).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-9, "{a} {b} {dot}");
            }
        }
    }

    #[test]
    fn rejects_large_k() {
        assert_eq!(fourier_terms(0, 4, 6, 3), Err(Error::KTooLarge { k: 3, m: 6 }));
        assert!(fourier_terms(0, 4, 6, 2).is_ok());
    }
}
