//! Regular time series, cleaning, and resampling between resolutions.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling interval of a regular series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Resolution {
    step_secs: i64,
}

impl Resolution {
    pub const MINUTE: Resolution = Resolution { step_secs: 60 };
    pub const FIVE_MINUTES: Resolution = Resolution { step_secs: 300 };
    pub const HOUR: Resolution = Resolution { step_secs: 3600 };
    pub const DAY: Resolution = Resolution { step_secs: 86_400 };

    pub fn from_secs(step_secs: i64) -> Result<Self> {
        if step_secs <= 0 {
            return Err(Error::InvalidParameter(format!(
                "resolution must be positive, got {step_secs}s"
            )));
        }
        Ok(Resolution { step_secs })
    }

    pub fn step_secs(self) -> i64 {
        self.step_secs
    }

    pub fn step(self) -> Duration {
        Duration::seconds(self.step_secs)
    }

    /// Number of `self` steps that make up one step of `coarser`.
    pub fn factor_to(self, coarser: Resolution) -> Result<usize> {
        if coarser.step_secs % self.step_secs != 0 {
            return Err(Error::NonIntegerFactor {
                from: self.step_secs,
                to: coarser.step_secs,
            });
        }
        Ok((coarser.step_secs / self.step_secs) as usize)
    }

    /// Number of steps in one day, if the resolution divides a day.
    pub fn steps_per_day(self) -> Option<usize> {
        (86_400 % self.step_secs == 0).then(|| (86_400 / self.step_secs) as usize)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.step_secs;
        if s % 86_400 == 0 {
            write!(f, "{}d", s / 86_400)
        } else if s % 3600 == 0 {
            write!(f, "{}h", s / 3600)
        } else if s % 60 == 0 {
            write!(f, "{}min", s / 60)
        } else {
            write!(f, "{s}s")
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| !c.is_ascii_digit())
            .ok_or_else(|| Error::InvalidParameter(format!("missing unit in '{s}'")))?;
        let (num, unit) = s.split_at(split);
        let n: i64 = num
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad duration '{s}'")))?;
        let mult = match unit {
            "s" => 1,
            "min" | "m" => 60,
            "h" => 3600,
            "d" => 86_400,
            _ => return Err(Error::InvalidParameter(format!("unknown unit in '{s}'"))),
        };
        Resolution::from_secs(n * mult)
    }
}

/// Seasonal period (steps per daily cycle) used for seasonal models and MASE.
///
/// Daily data has no intra-period cycle, so its period is 1.
pub fn seasonal_period(res: Resolution) -> Result<usize> {
    match res.step_secs {
        60 => Ok(1440),
        300 => Ok(288),
        3600 => Ok(24),
        86_400 => Ok(1),
        other => Err(Error::UnsupportedResolution(other)),
    }
}

/// Limits on missing data accepted by [`clean_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanPolicy {
    /// Missing fraction must be strictly below this value.
    pub max_missing_fraction: f64,
    /// Longest run of consecutive missing points, as a wall-clock duration in seconds.
    pub max_gap_secs: i64,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        CleanPolicy {
            max_missing_fraction: 0.005,
            max_gap_secs: 3 * 86_400,
        }
    }
}

impl CleanPolicy {
    /// Accepts any amount of missing data as long as one value is present.
    pub fn permissive() -> Self {
        CleanPolicy {
            max_missing_fraction: f64::INFINITY,
            max_gap_secs: i64::MAX,
        }
    }
}

/// Equally spaced observations with an explicit missing mask.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    start: DateTime<Utc>,
    resolution: Resolution,
    values: Vec<f64>,
    missing: Vec<bool>,
}

/// Missing points compare equal whatever placeholder they hold.
impl PartialEq for TimeSeries {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start
            && self.resolution == other.resolution
            && self.missing == other.missing
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.missing)
                .all(|((a, b), miss)| *miss || a == b)
    }
}

impl TimeSeries {
    pub fn new(start: DateTime<Utc>, resolution: Resolution, values: Vec<f64>) -> Self {
        let missing = values.iter().map(|v| !v.is_finite()).collect();
        TimeSeries {
            start,
            resolution,
            values,
            missing,
        }
    }

    /// Builds a series where `None` marks a missing observation.
    pub fn with_missing(
        start: DateTime<Utc>,
        resolution: Resolution,
        values: Vec<Option<f64>>,
    ) -> Self {
        let missing = values.iter().map(|v| v.is_none_or(|x| !x.is_finite())).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        TimeSeries {
            start,
            resolution,
            values,
            missing,
        }
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    /// Exclusive end timestamp.
    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp(self.len())
    }

    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(self.resolution.step_secs * index as i64)
    }

    /// Index of `t` on this series' grid, if `t` lies exactly on a step boundary.
    pub fn index_of(&self, t: DateTime<Utc>) -> Option<i64> {
        let secs = (t - self.start).num_seconds();
        (secs % self.resolution.step_secs == 0).then(|| secs / self.resolution.step_secs)
    }

    /// Sub-series over `range` with its start shifted accordingly.
    pub fn slice(&self, range: std::ops::Range<usize>) -> TimeSeries {
        TimeSeries {
            start: self.timestamp(range.start),
            resolution: self.resolution,
            values: self.values[range.clone()].to_vec(),
            missing: self.missing[range].to_vec(),
        }
    }

    fn longest_missing_run(&self) -> usize {
        let mut best = 0;
        let mut cur = 0;
        for &m in &self.missing {
            if m {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    }
}

/// Fills missing values and clamps negatives under the default policy.
pub fn clean(ts: &TimeSeries) -> Result<TimeSeries> {
    clean_with(ts, &CleanPolicy::default())
}

/// Linearly interpolates interior gaps, fills edge gaps with the nearest
/// observation, and clamps every value to be non-negative.
pub fn clean_with(ts: &TimeSeries, policy: &CleanPolicy) -> Result<TimeSeries> {
    let missing = ts.missing_count();
    let len = ts.len();
    let longest_run = ts.longest_missing_run();
    let max_run_steps = policy.max_gap_secs / ts.resolution.step_secs;
    let too_many = len > 0 && (missing as f64 / len as f64) >= policy.max_missing_fraction;
    if (missing > 0 && too_many) || longest_run as i64 > max_run_steps || (len > 0 && missing == len)
    {
        return Err(Error::MissingThresholdExceeded {
            missing,
            len,
            longest_run,
        });
    }
    let mut values = interpolate_gaps(&ts.values, &ts.missing);
    for v in &mut values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(TimeSeries {
        start: ts.start,
        resolution: ts.resolution,
        values,
        missing: vec![false; len],
    })
}

/// Interpolates missing values like [`clean_with`] but keeps the sign of
/// every value and applies no missing-data limits. Used for weather columns.
pub fn fill_gaps(ts: &TimeSeries) -> Result<TimeSeries> {
    if !ts.is_empty() && ts.missing_count() == ts.len() {
        return Err(Error::MissingThresholdExceeded {
            missing: ts.len(),
            len: ts.len(),
            longest_run: ts.len(),
        });
    }
    Ok(TimeSeries {
        start: ts.start,
        resolution: ts.resolution,
        values: interpolate_gaps(&ts.values, &ts.missing),
        missing: vec![false; ts.len()],
    })
}

/// Largest whole-day slice of `ts`, starting at its first midnight.
pub fn whole_days(ts: &TimeSeries) -> Result<TimeSeries> {
    let per_day = ts
        .resolution
        .steps_per_day()
        .ok_or(Error::UnsupportedResolution(ts.resolution.step_secs))?;
    let first = (0..ts.len().min(per_day))
        .find(|&i| ts.timestamp(i).time() == chrono::NaiveTime::MIN)
        .ok_or(Error::EmptyInput)?;
    let days = (ts.len() - first) / per_day;
    if days == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(ts.slice(first..first + days * per_day))
}

/// Linear interpolation across missing runs; edges take the nearest present value.
pub(crate) fn interpolate_gaps(values: &[f64], missing: &[bool]) -> Vec<f64> {
    let mut out = values.to_vec();
    let present: Vec<usize> = (0..values.len()).filter(|&i| !missing[i]).collect();
    let Some(&first) = present.first() else {
        return out;
    };
    let last = *present.last().unwrap();
    for v in out.iter_mut().take(first) {
        *v = values[first];
    }
    for v in out.iter_mut().skip(last + 1) {
        *v = values[last];
    }
    for w in present.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a > 1 {
            let (ya, yb) = (values[a], values[b]);
            let span = (b - a) as f64;
            for (i, v) in out.iter_mut().enumerate().take(b).skip(a + 1) {
                *v = ya + (yb - ya) * (i - a) as f64 / span;
            }
        }
    }
    out
}

/// Block means over `f` consecutive values, where `f = target / source`.
pub fn aggregate(ts: &TimeSeries, target: Resolution) -> Result<TimeSeries> {
    if ts.has_missing() {
        return Err(Error::MissingValues);
    }
    let values = aggregate_values(&ts.values, ts.resolution, target)?;
    Ok(TimeSeries::new(ts.start, target, values))
}

pub(crate) fn aggregate_values(values: &[f64], from: Resolution, to: Resolution) -> Result<Vec<f64>> {
    let f = from.factor_to(to)?;
    if !values.len().is_multiple_of(f) {
        return Err(Error::PartialBlock {
            len: values.len(),
            factor: f,
        });
    }
    Ok(values
        .chunks_exact(f)
        .map(|c| c.iter().sum::<f64>() / f as f64)
        .collect())
}

/// Piecewise-linear upsampling anchored at interval starts.
///
/// Points between two anchors are interpolated; the `f - 1` points after the
/// last anchor repeat it.
pub fn disaggregate(ts: &TimeSeries, target: Resolution) -> Result<TimeSeries> {
    if ts.has_missing() {
        return Err(Error::MissingValues);
    }
    let values = disaggregate_values(&ts.values, ts.resolution, target)?;
    Ok(TimeSeries::new(ts.start, target, values))
}

pub(crate) fn disaggregate_values(
    values: &[f64],
    from: Resolution,
    to: Resolution,
) -> Result<Vec<f64>> {
    let f = to.factor_to(from)?;
    let mut out = Vec::with_capacity(values.len() * f);
    for (i, &v) in values.iter().enumerate() {
        match values.get(i + 1) {
            Some(&next) => {
                for k in 0..f {
                    out.push(v + (next - v) * k as f64 / f as f64);
                }
            }
            None => out.extend(std::iter::repeat_n(v, f)),
        }
    }
    Ok(out)
}

/// Converts between any two resolutions related by an integer factor.
pub fn resample(ts: &TimeSeries, target: Resolution) -> Result<TimeSeries> {
    use std::cmp::Ordering;
    match target.step_secs.cmp(&ts.resolution.step_secs) {
        Ordering::Equal => Ok(ts.clone()),
        Ordering::Greater => aggregate(ts, target),
        Ordering::Less => disaggregate(ts, target),
    }
}

/// Weather variables in schema order.
pub const WEATHER_COLUMNS: [&str; 7] = [
    "wind_speed",
    "temperature",
    "dew_point",
    "cloud_cover",
    "uv_index",
    "humidity",
    "pressure",
];

/// The seven weather series sharing one time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherFrame {
    start: DateTime<Utc>,
    resolution: Resolution,
    columns: [Vec<f64>; 7],
}

impl WeatherFrame {
    pub fn new(
        start: DateTime<Utc>,
        resolution: Resolution,
        columns: [Vec<f64>; 7],
    ) -> Result<Self> {
        let len = columns[0].len();
        for c in &columns[1..] {
            if c.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: c.len(),
                });
            }
        }
        Ok(WeatherFrame {
            start,
            resolution,
            columns,
        })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn columns(&self) -> &[Vec<f64>; 7] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        WEATHER_COLUMNS
            .iter()
            .position(|&c| c == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn row(&self, i: usize) -> [f64; 7] {
        std::array::from_fn(|j| self.columns[j][i])
    }

    /// Resamples every column with the same rule used for power.
    pub fn resample(&self, target: Resolution) -> Result<WeatherFrame> {
        use std::cmp::Ordering;
        let convert = |c: &Vec<f64>| -> Result<Vec<f64>> {
            match target.step_secs.cmp(&self.resolution.step_secs) {
                Ordering::Equal => Ok(c.clone()),
                Ordering::Greater => aggregate_values(c, self.resolution, target),
                Ordering::Less => disaggregate_values(c, self.resolution, target),
            }
        };
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(7);
        for c in &self.columns {
            cols.push(convert(c)?);
        }
        let columns: [Vec<f64>; 7] = cols.try_into().expect("seven columns");
        WeatherFrame::new(self.start, target, columns)
    }

    /// Restricts the frame to the time grid of `power` (same resolution required).
    pub fn align_to(&self, power: &TimeSeries) -> Result<WeatherFrame> {
        if power.resolution() != self.resolution {
            return Err(Error::InvalidParameter(format!(
                "weather at {} cannot align with power at {}",
                self.resolution,
                power.resolution()
            )));
        }
        let offset_secs = (power.start() - self.start).num_seconds();
        let step = self.resolution.step_secs;
        if offset_secs < 0 || offset_secs % step != 0 {
            return Err(Error::InvalidParameter(
                "weather does not cover the start of the power series".into(),
            ));
        }
        let offset = (offset_secs / step) as usize;
        let end = offset + power.len();
        if end > self.len() {
            return Err(Error::InsufficientHistory {
                needed: end,
                available: self.len(),
            });
        }
        let columns = std::array::from_fn(|j| self.columns[j][offset..end].to_vec());
        WeatherFrame::new(power.start(), self.resolution, columns)
    }
}
