//! Automatic order selection: differencing from unit-root and seasonal
//! strength diagnostics, then a stepwise AICc search over ARMA orders.

use std::collections::HashMap;

use log::debug;
use serde::{Deserialize, Serialize};

use super::arima::{fit_arima, ArimaModel, ArimaOrder, FitOptions};
use super::diff::difference;
use super::kpss::{kpss_level, seasonal_strength};
use super::optim::NelderMeadOptions;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub max_p: usize,
    pub max_q: usize,
    pub max_seasonal_p: usize,
    pub max_seasonal_q: usize,
    pub max_d: usize,
    pub max_seasonal_d: usize,
    /// 5% critical value of the KPSS level-stationarity test.
    pub kpss_critical: f64,
    /// Seasonal strength above which one seasonal difference is taken.
    pub seasonal_strength_threshold: f64,
    /// Upper bound on the number of models fitted during the stepwise walk.
    pub max_models: usize,
    pub max_evals: usize,
    pub ftol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_p: 5,
            max_q: 5,
            max_seasonal_p: 2,
            max_seasonal_q: 2,
            max_d: 2,
            max_seasonal_d: 1,
            kpss_critical: 0.463,
            seasonal_strength_threshold: 0.64,
            max_models: 94,
            max_evals: 2000,
            ftol: 1e-8,
        }
    }
}

impl SearchConfig {
    fn fit_options(&self, include_constant: bool) -> FitOptions {
        FitOptions {
            include_constant,
            optimizer: NelderMeadOptions {
                ftol: self.ftol,
                max_evals: self.max_evals,
                ..NelderMeadOptions::default()
            },
        }
    }
}

/// Residuals of `y` regressed on an intercept and the exogenous columns.
fn regression_residuals(y: &[f64], exog: &[Vec<f64>]) -> Vec<f64> {
    if exog.is_empty() {
        return y.to_vec();
    }
    let n = y.len();
    let ones = vec![1.0; n];
    let mut cols: Vec<&[f64]> = vec![&ones];
    cols.extend(exog.iter().map(|c| &c[..n]));
    match linalg::least_squares(&cols, y) {
        Ok(b) => (0..n)
            .map(|t| y[t] - cols.iter().zip(&b).map(|(c, bi)| c[t] * bi).sum::<f64>())
            .collect(),
        Err(_) => y.to_vec(),
    }
}

/// Seasonal differences: one when the seasonal component is strong.
pub fn select_seasonal_d(x: &[f64], m: usize, config: &SearchConfig) -> usize {
    if m < 2 || config.max_seasonal_d == 0 || x.len() < 2 * m + 1 {
        return 0;
    }
    usize::from(seasonal_strength(x, m) > config.seasonal_strength_threshold)
}

/// Ordinary differences: difference while KPSS rejects level stationarity.
pub fn select_d(x: &[f64], config: &SearchConfig) -> usize {
    let mut d = 0;
    let mut cur = x.to_vec();
    while d < config.max_d && cur.len() > 3 && kpss_level(&cur) > config.kpss_critical {
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
        d += 1;
    }
    d
}

/// Ordering key: AICc, ties (within 1e-6) broken by parameter count then
/// lexicographic `(p, q, P, Q)`.
fn better(a: &ArimaModel, b: &ArimaModel) -> bool {
    let (fa, fb) = (a.aicc(), b.aicc());
    if (fa - fb).abs() > 1e-6 {
        return fa < fb;
    }
    let key = |m: &ArimaModel| {
        let o = m.order();
        (m.n_params(), o.p, o.q, o.seasonal_p, o.seasonal_q)
    };
    key(a) < key(b)
}

/// Selects differencing orders and runs the stepwise search, returning the
/// best fitted model.
pub fn auto_arima(
    y: &[f64],
    m: usize,
    exog: Option<&[Vec<f64>]>,
    config: &SearchConfig,
) -> Result<ArimaModel> {
    let n = y.len();
    let min_len = if m > 1 { 2 * m + 20 } else { 20 };
    if n < min_len {
        return Err(Error::InsufficientHistory {
            needed: min_len,
            available: n,
        });
    }
    let exog_cols = exog.unwrap_or(&[]);
    let resid = regression_residuals(y, exog_cols);
    let sd = select_seasonal_d(&resid, m, config);
    let after_seasonal = difference(&resid, 0, sd, m.max(1))?;
    let d = select_d(&after_seasonal, config);
    let include_constant = d + sd == 0;
    let seasonal = m > 1;
    debug!("auto_arima: n={n} m={m} d={d} D={sd}");

    let make = |p: usize, q: usize, sp: usize, sq: usize| {
        let o = ArimaOrder::new(p, d, q);
        if seasonal {
            o.seasonal(sp, sd, sq, m)
        } else {
            o
        }
    };
    let fit_opts = config.fit_options(include_constant);
    let mut cache: HashMap<ArimaOrder, Option<ArimaModel>> = HashMap::new();
    let fit = |order: ArimaOrder, cache: &mut HashMap<ArimaOrder, Option<ArimaModel>>| {
        if let Some(hit) = cache.get(&order) {
            return hit.clone();
        }
        if cache.len() >= config.max_models {
            return None;
        }
        let res = fit_arima(y, order, exog, &fit_opts).ok();
        if let Some(m) = &res {
            debug!("  {} aicc={:.3}", order, m.aicc());
        }
        cache.insert(order, res.clone());
        res
    };

    let in_box = |p: usize, q: usize, sp: usize, sq: usize| {
        p <= config.max_p
            && q <= config.max_q
            && (seasonal || sp + sq == 0)
            && sp <= config.max_seasonal_p
            && sq <= config.max_seasonal_q
    };
    let (s1, s2) = if seasonal { (1, 1) } else { (0, 0) };
    let mut starts = vec![
        (2.min(config.max_p), 2.min(config.max_q), s1.min(config.max_seasonal_p), s2.min(config.max_seasonal_q)),
        (0, 0, 0, 0),
    ];
    starts.dedup();
    let mut current: Option<ArimaModel> = None;
    for (p, q, sp, sq) in starts {
        if let Some(model) = fit(make(p, q, sp, sq), &mut cache) {
            if current.as_ref().is_none_or(|c| better(&model, c)) {
                current = Some(model);
            }
        }
    }
    let mut current = current.ok_or(Error::SearchExhausted)?;

    loop {
        let o = current.order();
        let coords = [o.p, o.q, o.seasonal_p, o.seasonal_q];
        let mut best_step: Option<ArimaModel> = None;
        for axis in 0..4 {
            if axis >= 2 && !seasonal {
                break;
            }
            for delta in [-1i64, 1] {
                let v = coords[axis] as i64 + delta;
                if v < 0 {
                    continue;
                }
                let mut c = coords;
                c[axis] = v as usize;
                if !in_box(c[0], c[1], c[2], c[3]) {
                    continue;
                }
                if let Some(model) = fit(make(c[0], c[1], c[2], c[3]), &mut cache) {
                    if best_step.as_ref().is_none_or(|b| better(&model, b)) {
                        best_step = Some(model);
                    }
                }
            }
        }
        match best_step {
            Some(b) if better(&b, &current) => current = b,
            _ => break,
        }
    }
    debug!("auto_arima selected {}", current.order());
    Ok(current)
}

/// Order chosen by [`auto_arima`].
pub fn auto_order(
    y: &[f64],
    m: usize,
    exog: Option<&[Vec<f64>]>,
    config: &SearchConfig,
) -> Result<ArimaOrder> {
    auto_arima(y, m, exog, config).map(|model| model.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| nd.sample(&mut rng)).collect()
    }

    #[test]
    fn trend_gets_differenced() {
        let y: Vec<f64> = noise(300, 1).iter().enumerate().map(|(t, e)| 0.2 * t as f64 + e).collect();
        let o = auto_order(&y, 1, None, &SearchConfig::default()).unwrap();
        assert!(o.d >= 1, "{o}");
    }

    #[test]
    fn too_short_is_rejected() {
        assert!(matches!(
            auto_arima(&noise(30, 2), 24, None, &SearchConfig::default()),
            Err(Error::InsufficientHistory { .. })
        ));
    }
}
