use crate::error::{Error, Result};
use crate::linalg;

use super::DesignMatrix;

/// Ordinary least-squares fit: `coefficients[0]` is the intercept, the rest
/// are slopes in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrModel {
    coefficients: Vec<f64>,
}

impl MlrModel {
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        MlrModel { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        predict_mlr(&self.coefficients, features)
    }
}

pub fn fit_mlr(x: &DesignMatrix) -> Result<MlrModel> {
    let r = x.width();
    if x.len() <= r + 1 {
        return Err(Error::RankDeficient);
    }
    let ones = vec![1.0; x.len()];
    let cols: Vec<Vec<f64>> = (0..r).map(|j| x.rows().iter().map(|row| row[j]).collect()).collect();
    let mut refs: Vec<&[f64]> = vec![&ones];
    refs.extend(cols.iter().map(|c| c.as_slice()));
    let coefficients = linalg::least_squares(&refs, x.targets())?;
    Ok(MlrModel { coefficients })
}

/// Affine prediction per row, clamped at zero.
pub fn predict_mlr(coefficients: &[f64], features: &[Vec<f64>]) -> Result<Vec<f64>> {
    let r = coefficients.len().saturating_sub(1);
    features
        .iter()
        .map(|row| {
            if row.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    actual: row.len(),
                });
            }
            let v = coefficients[0] + row.iter().zip(&coefficients[1..]).map(|(a, b)| a * b).sum::<f64>();
            Ok(v.max(0.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dm(rows: Vec<Vec<f64>>, y: Vec<f64>) -> DesignMatrix {
        DesignMatrix::new(rows, y).unwrap()
    }

    #[test]
    fn exact_slope() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let m = fit_mlr(&dm(x.clone(), y.clone())).unwrap();
        assert!(m.coefficients()[0].abs() < 1e-10);
        assert!((m.coefficients()[1] - 2.0).abs() < 1e-10);
        let pred = m.predict(&x).unwrap();
        for (p, t) in pred.iter().zip(&y) {
            assert!((p - t).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_target() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let m = fit_mlr(&dm(x, vec![4.0; 8])).unwrap();
        assert!((m.coefficients()[0] - 4.0).abs() < 1e-10);
        assert!(m.coefficients()[1].abs() < 1e-10 && m.coefficients()[2].abs() < 1e-10);
    }

    #[test]
    fn three_points_by_hand() {
        // normal equations: [3 3; 3 5] b = [4; 7] -> slope 1.5, intercept -1/6
        let m = fit_mlr(&dm(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 1.0, 3.0])).unwrap();
        assert!((m.coefficients()[1] - 1.5).abs() < 1e-12);
        assert!((m.coefficients()[0] + 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn predictions_clamp_and_check_width() {
        assert_eq!(predict_mlr(&[5.0, 0.0, 0.0], &[vec![1.0, 2.0]]).unwrap(), vec![5.0]);
        assert_eq!(predict_mlr(&[-3.0, 0.0], &[vec![1.0]]).unwrap(), vec![0.0]);
        assert!(matches!(
            predict_mlr(&[1.0, 1.0], &[vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn duplicated_feature_is_rank_deficient() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        assert_eq!(fit_mlr(&dm(x, (0..10).map(f64::from).collect())), Err(Error::RankDeficient));
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_design(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 12..40),
            noise in prop::collection::vec(-1.0f64..1.0, 40),
        ) {
            let y: Vec<f64> = rows.iter().zip(&noise).map(|(r, e)| 1.0 + r[0] - 2.0 * r[2] + e).collect();
            let m = fit_mlr(&dm(rows.clone(), y.clone())).unwrap();
            let c = m.coefficients();
            let resid: Vec<f64> = rows.iter().zip(&y)
                .map(|(r, t)| t - c[0] - r.iter().zip(&c[1..]).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let rn = resid.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let ones_dot: f64 = resid.iter().sum::<f64>() / (rn * (rows.len() as f64).sqrt());
            prop_assert!(ones_dot.abs() < 1e-8);
            for j in 0..3 {
                let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                let cn = col.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                let dot: f64 = col.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>() / (cn * rn);
                prop_assert!(dot.abs() < 1e-8);
            }
        }
    }
}
