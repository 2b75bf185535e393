use crate::error::{Error, Result};

/// Repeats the last observed season: step `i` (0-based) takes the value one
/// period before the matching point, `train[n - m + (i mod m)]`.
pub fn seasonal_naive(train: &[f64], m: usize, h: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter("seasonal period must be >= 1".into()));
    }
    let n = train.len();
    if n < m {
        return Err(Error::InsufficientHistory {
            needed: m,
            available: n,
        });
    }
    Ok((0..h).map(|i| train[n - m + i % m]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let t = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(seasonal_naive(&t, 2, 2).unwrap(), vec![3.0, 4.0]);
        assert_eq!(seasonal_naive(&t, 2, 4).unwrap(), vec![3.0, 4.0, 3.0, 4.0]);
        assert_eq!(
            seasonal_naive(&[5.0, 1.0, 9.0], 1, 3).unwrap(),
            vec![9.0, 9.0, 9.0]
        );
        assert!(seasonal_naive(&t, 5, 1).is_err());
    }

    #[test]
    fn one_full_season_is_the_last_season() {
        let t: Vec<f64> = (0..50).map(|i| (i * 7 % 11) as f64).collect();
        assert_eq!(seasonal_naive(&t, 24, 24).unwrap(), t[26..].to_vec());
    }
}
