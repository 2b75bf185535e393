//! Weather-driven regression forecasters.

pub mod mlr;
pub mod svr;

pub use mlr::{fit_mlr, predict_mlr, MlrModel};
pub use svr::{fit_svr, predict_svr, SvrModel, SvrParams};

use crate::error::{Error, Result};

/// Regressor rows with their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                actual: targets.len(),
            });
        }
        let width = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            if r.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    actual: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite feature".into()));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite target".into()));
        }
        Ok(DesignMatrix { rows, targets })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Evenly strided subset of at most `max_rows` rows, always keeping the last row.
    pub fn thinned(&self, max_rows: usize) -> DesignMatrix {
        let n = self.len();
        if n <= max_rows || max_rows == 0 {
            return self.clone();
        }
        let idx: Vec<usize> = (0..max_rows)
            .map(|i| n - 1 - ((max_rows - 1 - i) * (n - 1)) / (max_rows - 1).max(1))
            .collect();
        DesignMatrix {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}
