//! Mean absolute scaled error and aggregation helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One MASE value for a (house, method, sample) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub house_id: String,
    pub method: String,
    pub sample_index: usize,
    pub mase: f64,
}

/// In-sample scaling term of MASE: the mean absolute seasonal-naive error
/// over the training data. Computing it once lets many forecasts share it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaseScale {
    denominator: f64,
}

impl MaseScale {
    pub fn new(insample: &[f64], m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("seasonal period must be >= 1".into()));
        }
        let n = insample.len();
        if n <= m {
            return Err(Error::InsufficientHistory {
                needed: m + 1,
                available: n,
            });
        }
        let total: f64 = insample
            .iter()
            .skip(m)
            .zip(insample)
            .map(|(a, b)| (a - b).abs())
            .sum();
        let denominator = total / (n - m) as f64;
        if !(denominator > 0.0) || !denominator.is_finite() {
            return Err(Error::DegenerateDenominator);
        }
        Ok(MaseScale { denominator })
    }

    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    pub fn score(&self, actuals: &[f64], forecasts: &[f64]) -> Result<f64> {
        if actuals.len() != forecasts.len() {
            return Err(Error::LengthMismatch {
                expected: actuals.len(),
                actual: forecasts.len(),
            });
        }
        if actuals.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(self.score_unchecked(actuals, forecasts))
    }

    #[inline]
    pub(crate) fn score_unchecked(&self, actuals: &[f64], forecasts: &[f64]) -> f64 {
        let mae = actuals
            .iter()
            .zip(forecasts)
            .map(|(y, f)| (y - f).abs())
            .sum::<f64>()
            / actuals.len() as f64;
        mae / self.denominator
    }
}

/// MASE of `forecasts` against `actuals`, scaled by the seasonal-naive
/// in-sample error of `insample` at lag `m`.
pub fn mase(actuals: &[f64], forecasts: &[f64], insample: &[f64], m: usize) -> Result<f64> {
    if actuals.len() != forecasts.len() {
        return Err(Error::LengthMismatch {
            expected: actuals.len(),
            actual: forecasts.len(),
        });
    }
    MaseScale::new(insample, m)?.score(actuals, forecasts)
}

pub fn mean_mase(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_forecast_is_zero() {
        let ins = [1.0, 3.0, 2.0, 5.0];
        assert_eq!(mase(&[4.0, 2.0], &[4.0, 2.0], &ins, 1).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_example() {
        let v = mase(&[5.0, 6.0], &[4.0, 4.0], &[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn constant_season_is_degenerate() {
        assert_eq!(
            mase(&[1.0], &[0.0], &[0.0, 1.0, 0.0, 1.0], 2),
            Err(Error::DegenerateDenominator)
        );
    }

    #[test]
    fn mismatched_lengths() {
        assert!(matches!(
            mase(&[1.0, 2.0], &[1.0], &[0.0, 1.0, 3.0], 1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn means_and_medians() {
        assert_eq!(mean_mase(&[1.0]).unwrap(), 1.0);
        assert_eq!(mean_mase(&[0.5, 1.5]).unwrap(), 1.0);
        assert_eq!(mean_mase(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(mean_mase(&[]), Err(Error::EmptyInput));
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(median(&[0.7; 25]).unwrap(), 0.7);
        assert_eq!(median(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn seasonal_naive_on_training_data_is_near_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = 24;
        let y: Vec<f64> = (0..24 * 60)
            .map(|t| 5.0 * (std::f64::consts::TAU * t as f64 / m as f64).sin() + rng.random_range(-1.0..1.0))
            .collect();
        let (train, rest) = y.split_at(24 * 40);
        let scale = MaseScale::new(train, m).unwrap();
        let mut scores = Vec::new();
        for chunk in rest.chunks(m) {
            let start = train.len() + scores.len() * m;
            let fc: Vec<f64> = (0..m).map(|i| y[start - m + i]).collect();
            scores.push(scale.score(chunk, &fc).unwrap());
        }
        let mean = mean_mase(&scores).unwrap();
        assert!((mean - 1.0).abs() < 0.15, "mean {mean}");
    }

    proptest! {
        #[test]
        fn scale_free(
            ins in prop::collection::vec(-10.0f64..10.0, 30..60),
            a in prop::collection::vec(-10.0f64..10.0, 5),
            f in prop::collection::vec(-10.0f64..10.0, 5),
            c in 0.01f64..100.0,
        ) {
            let base = mase(&a, &f, &ins, 1).unwrap();
            let s = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
            let scaled = mase(&s(&a), &s(&f), &s(&ins), 1).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-9 * base.max(1.0));
        }

        #[test]
        fn median_permutation_invariant(mut v in prop::collection::vec(-5.0f64..5.0, 1..30), seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let before = median(&v).unwrap();
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(before, median(&v).unwrap());
        }
    }
}
