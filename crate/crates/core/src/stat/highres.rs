//! Resolution-aware (S)ARIMA(X) fitting.
//!
//! Minute and five-minute data have daily periods of 1440 and 288 steps, far
//! too long for seasonal lag polynomials. For those resolutions the model is
//! fitted on a trailing window only, with the daily cycle carried by Fourier
//! regressors and no seasonal ARMA terms.

use serde::{Deserialize, Serialize};

use super::arima::ArimaModel;
use super::auto::{auto_arima, SearchConfig};
use super::fourier::fourier_terms;
use crate::error::{Error, Result};
use crate::series::{seasonal_period, Resolution, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HighResConfig {
    /// Fourier sine/cosine pairs for long seasonal periods.
    pub fourier_k: usize,
    pub minute_window_days: usize,
    pub five_minute_window_days: usize,
    pub search: SearchConfig,
}

impl Default for HighResConfig {
    fn default() -> Self {
        HighResConfig {
            fourier_k: 3,
            minute_window_days: 25,
            five_minute_window_days: 14,
            search: SearchConfig::default(),
        }
    }
}

impl HighResConfig {
    /// Trailing window length in steps, or `None` to use the full history.
    pub fn window(&self, res: Resolution) -> Option<usize> {
        match res {
            Resolution::MINUTE => Some(self.minute_window_days * 1440),
            Resolution::FIVE_MINUTES => Some(self.five_minute_window_days * 288),
            _ => None,
        }
    }
}

/// A fitted model plus how to rebuild its regressors at any absolute index.
#[derive(Debug, Clone)]
pub struct ArimaForecaster {
    model: ArimaModel,
    /// Absolute index of the first observation the model was fitted on.
    origin: usize,
    trained_len: usize,
    fourier: Option<(usize, usize)>,
    weather_cols: usize,
}

fn build_exog(
    fourier: Option<(usize, usize)>,
    weather: Option<&[Vec<f64>]>,
    start: usize,
    len: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut cols = Vec::new();
    if let Some((m, k)) = fourier {
        cols.extend(fourier_terms(start, len, m, k)?);
    }
    if let Some(w) = weather {
        for c in w {
            if c.len() < start + len {
                return Err(Error::MissingExogenous);
            }
            cols.push(c[start..start + len].to_vec());
        }
    }
    Ok(cols)
}

/// Fits the statistical forecaster for `train`'s resolution.
///
/// `weather` columns (if any) start at the same timestamp as `train` and may
/// extend beyond it. Minute data uses the trailing 25 days and five-minute
/// data the trailing 14 days with Fourier seasonality; hourly and daily data
/// use the full history with native seasonal terms.
pub fn fit_high_resolution_arima(
    train: &TimeSeries,
    weather: Option<&[Vec<f64>]>,
    config: &HighResConfig,
) -> Result<ArimaForecaster> {
    let res = train.resolution();
    let m = seasonal_period(res)?;
    let y = train.values();
    let n = y.len();
    let (origin, fourier, search_m) = match config.window(res) {
        Some(w) => {
            if n < w {
                return Err(Error::InsufficientHistory {
                    needed: w,
                    available: n,
                });
            }
            (n - w, Some((m, config.fourier_k)), 1)
        }
        None => (0, None, m),
    };
    let exog = build_exog(fourier, weather, origin, n - origin)?;
    let exog_ref = (!exog.is_empty()).then_some(exog.as_slice());
    let model = auto_arima(&y[origin..], search_m, exog_ref, &config.search)?;
    Ok(ArimaForecaster {
        model,
        origin,
        trained_len: n - origin,
        fourier,
        weather_cols: weather.map_or(0, |w| w.len()),
    })
}

impl ArimaForecaster {
    pub fn model(&self) -> &ArimaModel {
        &self.model
    }

    /// Number of observations the model was fitted on.
    pub fn trained_len(&self) -> usize {
        self.trained_len
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn uses_fourier(&self) -> bool {
        self.fourier.is_some()
    }

    fn weather_arg<'a>(&self, weather: Option<&'a [Vec<f64>]>) -> Result<Option<&'a [Vec<f64>]>> {
        match (self.weather_cols, weather) {
            (0, _) => Ok(None),
            (_, None) => Err(Error::MissingExogenous),
            (r, Some(w)) if w.len() != r => Err(Error::DimensionMismatch {
                expected: r,
                actual: w.len(),
            }),
            (_, Some(w)) => Ok(Some(w)),
        }
    }

    /// Forecasts `h` steps from each cutoff (absolute index of the first
    /// forecast point), holding parameters fixed. Only `y[..cutoff]` informs
    /// the forecast made at `cutoff`; weather is read up to `cutoff + h`.
    pub fn rolling_forecasts(
        &self,
        y: &[f64],
        weather: Option<&[Vec<f64>]>,
        cutoffs: &[usize],
        h: usize,
    ) -> Result<Vec<Vec<f64>>> {
        let Some(&last) = cutoffs.iter().max() else {
            return Ok(Vec::new());
        };
        if cutoffs.iter().any(|&c| c <= self.origin) || last > y.len() {
            return Err(Error::InvalidParameter("cutoff outside the series".into()));
        }
        let weather = self.weather_arg(weather)?;
        let span = last + h - self.origin;
        let exog = build_exog(self.fourier, weather, self.origin, span)?;
        let exog_ref = (!exog.is_empty()).then_some(exog.as_slice());
        let history = &y[self.origin..last];
        let hist_exog: Option<Vec<Vec<f64>>> =
            exog_ref.map(|cols| cols.iter().map(|c| c[..history.len()].to_vec()).collect());
        let pass = self.model.residual_pass(history, hist_exog.as_deref())?;
        cutoffs
            .iter()
            .map(|&c| self.model.forecast_at(history, &pass, exog_ref, c - self.origin, h))
            .collect()
    }

    /// Single forecast computed from scratch on `y[..cutoff]`.
    pub fn forecast_at(
        &self,
        y: &[f64],
        weather: Option<&[Vec<f64>]>,
        cutoff: usize,
        h: usize,
    ) -> Result<Vec<f64>> {
        let history = &y[self.origin..cutoff];
        let weather = self.weather_arg(weather)?;
        let exog = build_exog(self.fourier, weather, self.origin, cutoff + h - self.origin)?;
        let exog_ref = (!exog.is_empty()).then_some(exog.as_slice());
        self.model.forecast_from_history(history, exog_ref, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use rand::{Rng, SeedableRng};

    fn daily_cycle(res: Resolution, days: usize, seed: u64) -> TimeSeries {
        let m = seasonal_period(res).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut ar = 0.0;
        let v = (0..days * m)
            .map(|t| {
                ar = 0.7 * ar + rng.random_range(-0.1..0.1);
                let phase = std::f64::consts::TAU * (t % m) as f64 / m as f64;
                (2.0 * -phase.cos()).max(0.0) + ar
            })
            .collect();
        TimeSeries::new(Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap(), res, v)
    }

    fn quick() -> HighResConfig {
        HighResConfig {
            search: SearchConfig {
                max_p: 2,
                max_q: 2,
                max_evals: 300,
                ..SearchConfig::default()
            },
            ..HighResConfig::default()
        }
    }

    #[test]
    fn five_minute_uses_fourteen_day_window() {
        let ts = daily_cycle(Resolution::FIVE_MINUTES, 20, 1);
        let f = fit_high_resolution_arima(&ts, None, &quick()).unwrap();
        assert_eq!(f.trained_len(), 14 * 288);
        assert!(f.uses_fourier());
        let o = f.model().order();
        assert_eq!((o.seasonal_p, o.seasonal_d, o.seasonal_q), (0, 0, 0));
    }

    #[test]
    fn minute_window_needs_enough_history() {
        let ts = daily_cycle(Resolution::MINUTE, 3, 2);
        assert!(matches!(
            fit_high_resolution_arima(&ts, None, &quick()),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn hourly_uses_full_history_and_native_season() {
        let ts = daily_cycle(Resolution::HOUR, 30, 3);
        let f = fit_high_resolution_arima(&ts, None, &quick()).unwrap();
        assert_eq!(f.trained_len(), ts.len());
        assert!(!f.uses_fourier());
        assert_eq!(f.model().order().period, 24);
    }

    #[test]
    fn rolling_matches_single_forecasts() {
        let ts = daily_cycle(Resolution::FIVE_MINUTES, 16, 4);
        let train = ts.slice(0..15 * 288);
        let f = fit_high_resolution_arima(&train, None, &quick()).unwrap();
        let cutoffs = [15 * 288, 15 * 288 + 12, 15 * 288 + 100];
        let roll = f.rolling_forecasts(ts.values(), None, &cutoffs, 12).unwrap();
        for (c, r) in cutoffs.iter().zip(&roll) {
            assert_eq!(&f.forecast_at(ts.values(), None, *c, 12).unwrap(), r);
        }
    }
}
