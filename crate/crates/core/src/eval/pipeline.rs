//! Two-stage pipeline for one house at one resolution/horizon pair.
//!
//! Stage A fits the base forecasters on the train range and forecasts every
//! holdout sample; combination weights and hyperparameters are chosen on
//! those forecasts. Stage B refits on train + holdout, forecasts the test
//! samples and scores every method.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::splits::{extract_samples, make_splits, Sample, SplitPlan};
use super::{Method, Pair};
use crate::combine::{
    average_weights, blend, fit_weights_pso, fit_weights_recursive, CombinationProblem, ForecastMatrix, Strategy,
    WeightVector,
};
use crate::error::{Error, Result};
use crate::metrics::MaseScale;
use crate::ml::{fit_mlr, fit_svr, DesignMatrix, MlrModel, SvrModel, SvrParams};
use crate::par;
use crate::series::{resample, seasonal_period, whole_days, TimeSeries, WeatherFrame};
use crate::stat::{fit_high_resolution_arima, seasonal_naive, ArimaForecaster, HighResConfig};
use crate::swarm::PsoParams;
use crate::tuning::{random_search, Point, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub arima: HighResConfig,
    /// SVR settings; gamma and epsilon are replaced by tuned values when
    /// `svr_trials > 0`.
    pub svr: SvrParams,
    /// Training rows kept for SVR (evenly strided subsample).
    pub svr_max_rows: usize,
    pub svr_trials: usize,
    pub svr_space: SearchSpace,
    /// Base PSO settings; acceleration, inertia and neighbourhood are tuned
    /// when `pso_trials > 0`.
    pub pso: PsoParams,
    pub pso_trials: usize,
    /// Defaults to the standard space for `pso.swarm_size`.
    pub pso_space: Option<SearchSpace>,
    pub re_threshold: f64,
    pub re_max_iterations: usize,
    pub re_trials: usize,
    pub re_space: SearchSpace,
    /// Samples per stage re-forecast from perturbed future values.
    pub leakage_checks: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            arima: HighResConfig::default(),
            svr: SvrParams::default(),
            svr_max_rows: 1000,
            svr_trials: 30,
            svr_space: SearchSpace::svr(),
            pso: PsoParams::default(),
            pso_trials: 30,
            pso_space: None,
            re_threshold: 1e-3,
            re_max_iterations: 50,
            re_trials: 30,
            re_space: SearchSpace::recursive(),
            leakage_checks: 3,
            seed: 0,
        }
    }
}

/// Power and weather for one house on a common grid.
#[derive(Debug, Clone)]
pub struct HouseData {
    pub id: String,
    pub power: TimeSeries,
    pub weather: WeatherFrame,
}

/// Trims power to whole days and resamples power and weather onto the
/// pair's resolution.
pub fn prepare_house(id: &str, power: &TimeSeries, weather: &WeatherFrame, pair: Pair) -> Result<HouseData> {
    let power = resample(&whole_days(power)?, pair.resolution)?;
    let weather = weather.resample(pair.resolution)?.align_to(&power)?;
    Ok(HouseData {
        id: id.to_string(),
        power,
        weather,
    })
}

/// Forecasts and scores for one test sample, indexed like [`Method::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub cutoff: usize,
    pub actuals: Vec<f64>,
    /// Reported (non-negative) forecasts per method.
    pub forecasts: Vec<Vec<f64>>,
    pub mase: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedParams {
    pub svr_gamma: f64,
    pub svr_epsilon: f64,
    pub re_threshold: f64,
    /// Chosen PSO settings per PSO strategy.
    pub pso: Vec<(Strategy, PsoParams)>,
    pub sarima_order: String,
    pub sarimax_order: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseResult {
    pub house_id: String,
    pub pair: Pair,
    pub split: SplitPlan,
    pub holdout_samples: usize,
    /// Mean test MASE per method, indexed like [`Method::ALL`].
    pub mean_mase: Vec<f64>,
    /// One weight vector per strategy, in [`Strategy::ALL`] order.
    pub weights: Vec<WeightVector>,
    /// Holdout objective reached by each strategy.
    pub holdout_objective: Vec<f64>,
    pub tuned: TunedParams,
    /// MASE denominator used for the test samples.
    pub test_scale: f64,
    pub samples: Vec<SampleRecord>,
    pub leakage_checked: usize,
}

impl HouseResult {
    pub fn mean(&self, method: Method) -> f64 {
        self.mean_mase[method.index()]
    }

    pub fn test_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn weights_for(&self, strategy: Strategy) -> &WeightVector {
        &self.weights[Strategy::ALL.iter().position(|&s| s == strategy).expect("listed")]
    }
}

/// Data shared by both stages.
struct Context<'a> {
    power: &'a TimeSeries,
    y: &'a [f64],
    rows: Vec<Vec<f64>>,
    weather: Vec<Vec<f64>>,
    m: usize,
    h: usize,
}

struct Stage {
    matrices: Vec<ForecastMatrix>,
    sarima: ArimaForecaster,
    sarimax: ArimaForecaster,
    mlr: MlrModel,
    svr: SvrModel,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-purpose seed derived from the run seed.
fn derive_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut acc = mix(seed);
    for p in parts {
        for b in p.bytes() {
            acc = mix(acc ^ u64::from(b));
        }
        acc = mix(acc ^ 0xff);
    }
    acc
}

fn design(ctx: &Context, end: usize) -> Result<DesignMatrix> {
    DesignMatrix::new(ctx.rows[..end].to_vec(), ctx.y[..end].to_vec())
}

/// Model predictions for every step covered by `samples`, one vec per sample.
fn per_sample<F>(samples: &[Sample], h: usize, rows: &[Vec<f64>], predict: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[Vec<f64>]) -> Result<Vec<f64>>,
{
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    let start = first.cutoff;
    let end = samples.last().map_or(start, |s| s.cutoff + h);
    let all = predict(&rows[start..end])?;
    Ok(samples
        .iter()
        .map(|s| all[s.cutoff - start..s.cutoff - start + h].to_vec())
        .collect())
}

fn mean_score(scale: &MaseScale, samples: &[Sample], forecasts: &[Vec<f64>]) -> f64 {
    let total: f64 = samples
        .iter()
        .zip(forecasts)
        .map(|(s, f)| scale.score_unchecked(&s.actuals, f))
        .sum();
    total / samples.len() as f64
}

fn tune_svr(ctx: &Context, fit_end: usize, samples: &[Sample], scale: &MaseScale, cfg: &EvalConfig, tag: &[&str]) -> Result<SvrParams> {
    if cfg.svr_trials == 0 {
        return Ok(cfg.svr);
    }
    let train = design(ctx, fit_end)?.thinned(cfg.svr_max_rows);
    let params_at = |p: &Point| SvrParams {
        gamma: p.get("gamma").unwrap_or(cfg.svr.gamma),
        epsilon: p.get("epsilon").unwrap_or(cfg.svr.epsilon),
        ..cfg.svr
    };
    let seed = derive_seed(cfg.seed, &[tag, &["svr"]].concat());
    let search = random_search(
        &cfg.svr_space,
        |p| {
            let Ok(model) = fit_svr(&train, &params_at(p)) else {
                return f64::INFINITY;
            };
            match per_sample(samples, ctx.h, &ctx.rows, |r| model.predict(r)) {
                Ok(f) => mean_score(scale, samples, &f),
                Err(_) => f64::INFINITY,
            }
        },
        cfg.svr_trials,
        seed,
    )?;
    debug!("svr tuned to {:?} ({:.4})", search.best.values(), search.best_value);
    Ok(params_at(&search.best))
}

fn run_stage(ctx: &Context, fit_end: usize, samples: &[Sample], svr_params: &SvrParams, cfg: &EvalConfig) -> Result<Stage> {
    let train = ctx.power.slice(0..fit_end);
    let clock = std::time::Instant::now();
    let (sarima, sarimax) = par::join(
        || fit_high_resolution_arima(&train, None, &cfg.arima),
        || fit_high_resolution_arima(&train, Some(&ctx.weather), &cfg.arima),
    );
    let (sarima, sarimax) = (sarima?, sarimax?);
    debug!("arima fits {:.2}s", clock.elapsed().as_secs_f64());
    let mlr = fit_mlr(&design(ctx, fit_end)?)?;
    let svr = fit_svr(&design(ctx, fit_end)?.thinned(cfg.svr_max_rows), svr_params)?;

    let cutoffs: Vec<usize> = samples.iter().map(|s| s.cutoff).collect();
    let sa = sarima.rolling_forecasts(ctx.y, None, &cutoffs, ctx.h)?;
    let sx = sarimax.rolling_forecasts(ctx.y, Some(&ctx.weather), &cutoffs, ctx.h)?;
    let ml = per_sample(samples, ctx.h, &ctx.rows, |r| mlr.predict(r))?;
    let sv = per_sample(samples, ctx.h, &ctx.rows, |r| svr.predict(r))?;
    debug!("base forecasts done {:.2}s", clock.elapsed().as_secs_f64());
    let matrices = samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let sn = seasonal_naive(&ctx.y[..s.cutoff], ctx.m, ctx.h)?;
            ForecastMatrix::from_columns(&[sn, sa[k].clone(), sx[k].clone(), ml[k].clone(), sv[k].clone()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Stage {
        matrices,
        sarima,
        sarimax,
        mlr,
        svr,
    })
}

fn spread(count: usize, k: usize) -> Vec<usize> {
    if k == 0 || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![0];
    }
    let mut idx: Vec<usize> = (0..count.min(k)).map(|i| i * (k - 1) / (count.min(k) - 1).max(1)).collect();
    idx.dedup();
    idx
}

/// Re-forecasts selected samples after perturbing every value from the
/// cutoff onwards; any change means the forecast saw the future.
fn check_leakage(ctx: &Context, stage: &Stage, samples: &[Sample], count: usize) -> Result<usize> {
    let picks = spread(count, samples.len());
    for &i in &picks {
        let c = samples[i].cutoff;
        let mut perturbed = ctx.y.to_vec();
        for v in &mut perturbed[c..] {
            *v = *v * 1.5 + 1.0;
        }
        let end = c + ctx.h;
        let fresh = [
            seasonal_naive(&perturbed[..c], ctx.m, ctx.h)?,
            stage.sarima.forecast_at(&perturbed, None, c, ctx.h)?,
            stage.sarimax.forecast_at(&perturbed, Some(&ctx.weather), c, ctx.h)?,
            stage.mlr.predict(&ctx.rows[c..end])?,
            stage.svr.predict(&ctx.rows[c..end])?,
        ];
        let matrix = &stage.matrices[i];
        for (j, f) in fresh.iter().enumerate() {
            let original = matrix.column(j);
            if f.iter()
                .zip(&original)
                .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs()))
            {
                return Err(Error::Leakage {
                    method: Method::BASE[j].label().to_string(),
                    cutoff: c,
                });
            }
        }
    }
    Ok(picks.len())
}

fn apply_pso_point(base: &PsoParams, p: &Point) -> PsoParams {
    let neighbors = p
        .get("neighbors")
        .map_or(base.neighbors, |v| (v.round() as usize).clamp(1, base.swarm_size));
    PsoParams {
        cognitive: p.get("c1").unwrap_or(base.cognitive),
        social: p.get("c2").unwrap_or(base.social),
        inertia: p.get("inertia").unwrap_or(base.inertia),
        neighbors,
        ..base.clone()
    }
}

fn fit_pso_strategy(problem: &CombinationProblem, strategy: Strategy, cfg: &EvalConfig, tag: &[&str]) -> Result<(WeightVector, PsoParams)> {
    let base = PsoParams {
        seed: derive_seed(cfg.seed, &[tag, &[strategy.as_str(), "pso"]].concat()),
        neighbors: cfg.pso.neighbors.min(cfg.pso.swarm_size),
        ..cfg.pso.clone()
    };
    let chosen = if cfg.pso_trials == 0 {
        base
    } else {
        let space = cfg.pso_space.clone().unwrap_or_else(|| SearchSpace::pso(base.swarm_size));
        let search = random_search(
            &space,
            |p| match fit_weights_pso(problem, strategy, &apply_pso_point(&base, p)) {
                Ok(w) => problem.objective(w.weights()),
                Err(_) => f64::INFINITY,
            },
            cfg.pso_trials,
            derive_seed(cfg.seed, &[tag, &[strategy.as_str(), "search"]].concat()),
        )?;
        apply_pso_point(&base, &search.best)
    };
    Ok((fit_weights_pso(problem, strategy, &chosen)?, chosen))
}

fn fit_recursive(problem: &CombinationProblem, cfg: &EvalConfig, tag: &[&str]) -> Result<(WeightVector, f64)> {
    let threshold = if cfg.re_trials == 0 {
        cfg.re_threshold
    } else {
        let search = random_search(
            &cfg.re_space,
            |p| {
                let t = p.get("threshold").unwrap_or(cfg.re_threshold);
                fit_weights_recursive(problem, t, cfg.re_max_iterations)
                    .map_or(f64::INFINITY, |w| problem.objective(w.weights()))
            },
            cfg.re_trials,
            derive_seed(cfg.seed, &[tag, &["recursive"]].concat()),
        )?;
        search.best.get("threshold").unwrap_or(cfg.re_threshold)
    };
    Ok((fit_weights_recursive(problem, threshold, cfg.re_max_iterations)?, threshold))
}

/// Runs the full protocol for one house. `house` must already be on the
/// pair's resolution (see [`prepare_house`]).
pub fn evaluate_house(house: &HouseData, pair: Pair, cfg: &EvalConfig) -> Result<HouseResult> {
    let power = &house.power;
    if power.resolution() != pair.resolution || house.weather.resolution() != pair.resolution {
        return Err(Error::InvalidParameter(format!(
            "house {} is not on the {} grid",
            house.id, pair.resolution
        )));
    }
    if house.weather.len() != power.len() || house.weather.start() != power.start() {
        return Err(Error::LengthMismatch {
            expected: power.len(),
            actual: house.weather.len(),
        });
    }
    let pair_label = pair.to_string();
    let tag = [house.id.as_str(), pair_label.as_str()];
    let m = seasonal_period(pair.resolution)?;
    let h = pair.steps;
    let split = make_splits(power)?;
    let holdout = extract_samples(power, split.holdout.clone(), h);
    let test = extract_samples(power, split.test.clone(), h);
    if holdout.is_empty() || test.is_empty() {
        return Err(Error::InsufficientHistory {
            needed: h,
            available: split.holdout.len().min(split.test.len()),
        });
    }
    let y = power.values();
    let scale_a = MaseScale::new(&y[split.train.clone()], m)?;
    let scale_b = MaseScale::new(&y[split.insample()], m)?;
    let ctx = Context {
        power,
        y,
        rows: (0..power.len()).map(|i| house.weather.row(i).to_vec()).collect(),
        weather: house.weather.columns().to_vec(),
        m,
        h,
    };

    info!("{} {}: stage A on {} train points, {} holdout samples", house.id, pair, split.train.len(), holdout.len());
    let svr_params = tune_svr(&ctx, split.train.end, &holdout, &scale_a, cfg, &tag)?;
    let stage_a = run_stage(&ctx, split.train.end, &holdout, &svr_params, cfg)?;
    let mut leakage_checked = check_leakage(&ctx, &stage_a, &holdout, cfg.leakage_checks)?;

    let problem = CombinationProblem::with_scale(
        stage_a.matrices.clone(),
        holdout.iter().map(|s| s.actuals.clone()).collect(),
        scale_a,
    )?;
    let mut weights = Vec::with_capacity(Strategy::ALL.len());
    let mut pso_tuned = Vec::new();
    let mut re_threshold = cfg.re_threshold;
    for strategy in Strategy::ALL {
        let w = match strategy {
            Strategy::Average => average_weights(problem.width())?,
            Strategy::Recursive => {
                let (w, t) = fit_recursive(&problem, cfg, &tag)?;
                re_threshold = t;
                w
            }
            _ => {
                let (w, p) = fit_pso_strategy(&problem, strategy, cfg, &tag)?;
                pso_tuned.push((strategy, p));
                w
            }
        };
        debug!("{} {} {strategy}: {:?}", house.id, pair, w.weights());
        weights.push(w);
    }
    let holdout_objective = weights.iter().map(|w| problem.objective(w.weights())).collect();

    info!("{} {}: stage B on {} points, {} test samples", house.id, pair, split.insample().len(), test.len());
    let stage_b = run_stage(&ctx, split.holdout.end, &test, &svr_params, cfg)?;
    leakage_checked += check_leakage(&ctx, &stage_b, &test, cfg.leakage_checks)?;

    let mut samples = Vec::with_capacity(test.len());
    for (s, matrix) in test.iter().zip(&stage_b.matrices) {
        let mut forecasts: Vec<Vec<f64>> = (0..Method::BASE.len()).map(|j| matrix.column(j)).collect();
        for w in &weights {
            forecasts.push(blend(matrix, w.weights())?);
        }
        for f in &mut forecasts {
            for v in f.iter_mut() {
                *v = v.max(0.0);
            }
        }
        let mase = forecasts.iter().map(|f| scale_b.score_unchecked(&s.actuals, f)).collect();
        samples.push(SampleRecord {
            cutoff: s.cutoff,
            actuals: s.actuals.clone(),
            forecasts,
            mase,
        });
    }
    let mean_mase = (0..Method::ALL.len())
        .map(|j| samples.iter().map(|r| r.mase[j]).sum::<f64>() / samples.len() as f64)
        .collect();

    Ok(HouseResult {
        house_id: house.id.clone(),
        pair,
        split,
        holdout_samples: holdout.len(),
        mean_mase,
        weights,
        holdout_objective,
        tuned: TunedParams {
            svr_gamma: svr_params.gamma,
            svr_epsilon: svr_params.epsilon,
            re_threshold,
            pso: pso_tuned,
            sarima_order: stage_b.sarima.model().order().to_string(),
            sarimax_order: stage_b.sarimax.model().order().to_string(),
        },
        test_scale: scale_b.denominator(),
        samples,
        leakage_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_every_part() {
        let a = derive_seed(1, &["h1", "1h-1d", "box01"]);
        assert_ne!(a, derive_seed(2, &["h1", "1h-1d", "box01"]));
        assert_ne!(a, derive_seed(1, &["h2", "1h-1d", "box01"]));
        assert_ne!(a, derive_seed(1, &["h1", "1h-1d", "convex"]));
        assert_ne!(derive_seed(1, &["ab", "c"]), derive_seed(1, &["a", "bc"]));
        assert_eq!(a, derive_seed(1, &["h1", "1h-1d", "box01"]));
    }

    #[test]
    fn spread_picks_ends() {
        assert_eq!(spread(3, 10), vec![0, 4, 9]);
        assert_eq!(spread(3, 2), vec![0, 1]);
        assert_eq!(spread(5, 1), vec![0]);
        assert!(spread(0, 5).is_empty());
    }
}
