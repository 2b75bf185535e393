use crate::error::{Error, Result};

/// Applies `seasonal_d` lag-`m` differences and then `d` lag-1 differences.
pub fn difference(x: &[f64], d: usize, seasonal_d: usize, m: usize) -> Result<Vec<f64>> {
    let lost = d + seasonal_d * m;
    if x.len() <= lost {
        return Err(Error::InsufficientHistory {
            needed: lost + 1,
            available: x.len(),
        });
    }
    let mut out = x.to_vec();
    for _ in 0..seasonal_d {
        out = lag_diff(&out, m);
    }
    for _ in 0..d {
        out = lag_diff(&out, 1);
    }
    Ok(out)
}

fn lag_diff(x: &[f64], lag: usize) -> Vec<f64> {
    x.iter().skip(lag).zip(x).map(|(a, b)| a - b).collect()
}

/// Lags of the differencing stages in application order.
fn stages(d: usize, seasonal_d: usize, m: usize) -> Vec<usize> {
    std::iter::repeat_n(m, seasonal_d)
        .chain(std::iter::repeat_n(1, d))
        .collect()
}

/// Maps forecasts of the differenced series back to the original scale.
///
/// `history` must end at the last observation before the forecasts and hold at
/// least `d + seasonal_d * m` values; only that trailing window is read.
pub fn undifference(
    forecast_diffs: &[f64],
    history: &[f64],
    d: usize,
    seasonal_d: usize,
    m: usize,
) -> Result<Vec<f64>> {
    let need = d + seasonal_d * m;
    if history.len() < need {
        return Err(Error::InsufficientHistory {
            needed: need,
            available: history.len(),
        });
    }
    if need == 0 {
        return Ok(forecast_diffs.to_vec());
    }
    let tail = &history[history.len() - need..];
    let lags = stages(d, seasonal_d, m);
    // levels[k] is the tail after the first k differencing stages
    let mut levels: Vec<Vec<f64>> = vec![tail.to_vec()];
    for &lag in &lags {
        let next = lag_diff(levels.last().unwrap(), lag);
        levels.push(next);
    }
    let mut current = forecast_diffs.to_vec();
    for k in (0..lags.len()).rev() {
        let lag = lags[k];
        let mut ext = levels[k].clone();
        let base = ext.len();
        for (i, &f) in current.iter().enumerate() {
            let prev = ext[base + i - lag];
            ext.push(f + prev);
        }
        current = ext[base..].to_vec();
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(difference(&[1.0, 2.0, 4.0], 1, 0, 1).unwrap(), vec![1.0, 2.0]);
        assert_eq!(
            difference(&[1.0, 2.0, 3.0, 4.0], 0, 1, 2).unwrap(),
            vec![2.0, 2.0]
        );
        let x = [3.0, 1.0, 4.0];
        assert_eq!(difference(&x, 0, 0, 7).unwrap(), x.to_vec());
        assert!(difference(&[1.0, 2.0], 0, 1, 2).is_err());
    }

    #[test]
    fn roundtrips() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let dx = difference(&x, 1, 0, 1).unwrap();
        assert_eq!(undifference(&dx[1..], &x[..2], 1, 0, 1).unwrap(), vec![4.0, 7.0]);
        assert_eq!(undifference(&dx, &x[..1], 1, 0, 1).unwrap(), vec![2.0, 4.0, 7.0]);

        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let dx = difference(&x, 0, 1, 2).unwrap();
        assert_eq!(
            undifference(&dx, &x[..2], 0, 1, 2).unwrap(),
            vec![3.0, 4.0, 5.0, 6.0]
        );
    }

    #[test]
    fn zero_diffs_continue_last_value() {
        assert_eq!(
            undifference(&[0.0, 0.0, 0.0], &[2.0, 5.0], 1, 0, 1).unwrap(),
            vec![5.0, 5.0, 5.0]
        );
    }

    proptest! {
        #[test]
        fn difference_inverse_is_exact(
            x in prop::collection::vec(-100.0f64..100.0, 30..60),
            d in 0usize..=2,
            sd in 0usize..=1,
            m in 1usize..6,
            h in 1usize..8,
        ) {
            let s = d + sd * m;
            prop_assume!(x.len() > s + h);
            let split = x.len() - h;
            let dx = difference(&x, d, sd, m).unwrap();
            let fut = &dx[dx.len() - h..];
            let back = undifference(fut, &x[..split], d, sd, m).unwrap();
            for (a, b) in back.iter().zip(&x[split..]) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()) * 100.0);
            }
        }
    }
}
