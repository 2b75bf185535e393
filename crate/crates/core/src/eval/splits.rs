use std::ops::Range;

use chrono::{DateTime, Months, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Contiguous index ranges: model fitting, weight fitting, and scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Range<usize>,
    pub holdout: Range<usize>,
    pub test: Range<usize>,
}

impl SplitPlan {
    /// Everything before the test range.
    pub fn insample(&self) -> Range<usize> {
        self.train.start..self.holdout.end
    }
}

fn midnight(t: DateTime<Utc>) -> DateTime<Utc> {
    t.date_naive().and_hms_opt(0, 0, 0).expect("valid midnight").and_utc()
}

/// The last calendar month is the test range and the two months before it
/// the holdout range; boundaries fall on midnight UTC.
pub fn make_splits(ts: &TimeSeries) -> Result<SplitPlan> {
    let (start, end) = (ts.start(), ts.end());
    let too_short = || Error::SeriesTooShort {
        start: start.to_rfc3339(),
        end: end.to_rfc3339(),
    };
    let four_months = start.checked_add_months(Months::new(4)).ok_or_else(too_short)?;
    if four_months > end {
        return Err(too_short());
    }
    let step = ts.resolution().step_secs();
    let index = |t: DateTime<Utc>| -> usize {
        let secs = (midnight(t) - start).num_seconds().max(0);
        (((secs + step - 1) / step) as usize).min(ts.len())
    };
    let test_start = index(end.checked_sub_months(Months::new(1)).ok_or_else(too_short)?);
    let holdout_start = index(end.checked_sub_months(Months::new(3)).ok_or_else(too_short)?);
    Ok(SplitPlan {
        train: 0..holdout_start,
        holdout: holdout_start..test_start,
        test: test_start..ts.len(),
    })
}

/// One forecast window: history is `y[..cutoff]`, the target `y[cutoff..cutoff + h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub cutoff: usize,
    pub actuals: Vec<f64>,
}

/// Non-overlapping windows of length `h` tiled from the start of `range`;
/// a trailing partial window is dropped.
pub fn extract_samples(ts: &TimeSeries, range: Range<usize>, h: usize) -> Vec<Sample> {
    if h == 0 {
        return Vec::new();
    }
    let end = range.end.min(ts.len());
    let values = ts.values();
    (range.start..end)
        .step_by(h)
        .take_while(|&c| c + h <= end)
        .map(|c| Sample {
            cutoff: c,
            actuals: values[c..c + h].to_vec(),
        })
        .collect()
}
