//! Weighted combination of base forecasts and the strategies that choose
//! the weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MaseScale;
use crate::swarm::{self, PsoParams};

/// `h × n` block of base forecasts for one sample, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastMatrix {
    horizon: usize,
    width: usize,
    values: Vec<f64>,
}

impl ForecastMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || width == 0 {
            return Err(Error::EmptyInput);
        }
        let mut values = Vec::with_capacity(rows.len() * width);
        for r in rows {
            if r.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    actual: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::checked(rows.len(), width, values)
    }

    /// From per-forecaster columns, each of length `h`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let width = columns.len();
        let horizon = columns.first().map_or(0, |c| c.len());
        if width == 0 || horizon == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(c) = columns.iter().find(|c| c.len() != horizon) {
            return Err(Error::LengthMismatch {
                expected: horizon,
                actual: c.len(),
            });
        }
        let values = (0..horizon)
            .flat_map(|t| columns.iter().map(move |c| c[t]))
            .collect();
        Self::checked(horizon, width, values)
    }

    fn checked(horizon: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite base forecast".into()));
        }
        Ok(ForecastMatrix { horizon, width, values })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.width..(t + 1) * self.width]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.horizon).map(|t| self.values[t * self.width + j]).collect()
    }

    pub fn scaled(&self, c: f64) -> ForecastMatrix {
        ForecastMatrix {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Unconstrained,
    Box01,
    Convex,
    Average,
    Recursive,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Unconstrained,
        Strategy::Box01,
        Strategy::Convex,
        Strategy::Average,
        Strategy::Recursive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Unconstrained => "unconstrained",
            Strategy::Box01 => "box01",
            Strategy::Convex => "convex",
            Strategy::Average => "average",
            Strategy::Recursive => "recursive",
        }
    }

    pub fn uses_pso(self) -> bool {
        matches!(self, Strategy::Unconstrained | Strategy::Box01 | Strategy::Convex)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    strategy: Strategy,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, strategy: Strategy) -> Self {
        WeightVector { weights, strategy }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn blend_into(f: &ForecastMatrix, w: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..f.horizon).map(|t| f.row(t).iter().zip(w).map(|(a, b)| a * b).sum::<f64>()));
}

/// `F · w` without clamping.
pub fn blend(f: &ForecastMatrix, w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != f.width {
        return Err(Error::DimensionMismatch {
            expected: f.width,
            actual: w.len(),
        });
    }
    let mut out = Vec::with_capacity(f.horizon);
    blend_into(f, w, &mut out);
    Ok(out)
}

/// Mean MASE of blended forecasts over a set of samples, all scaled by the
/// same in-sample denominator.
#[derive(Debug, Clone)]
pub struct CombinationProblem {
    samples: Vec<ForecastMatrix>,
    actuals: Vec<Vec<f64>>,
    scale: MaseScale,
}

impl CombinationProblem {
    pub fn new(samples: Vec<ForecastMatrix>, actuals: Vec<Vec<f64>>, insample: &[f64], m: usize) -> Result<Self> {
        Self::with_scale(samples, actuals, MaseScale::new(insample, m)?)
    }

    pub fn with_scale(samples: Vec<ForecastMatrix>, actuals: Vec<Vec<f64>>, scale: MaseScale) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if samples.len() != actuals.len() {
            return Err(Error::LengthMismatch {
                expected: samples.len(),
                actual: actuals.len(),
            });
        }
        let width = samples[0].width;
        for (s, a) in samples.iter().zip(&actuals) {
            if s.width != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    actual: s.width,
                });
            }
            if s.horizon != a.len() {
                return Err(Error::LengthMismatch {
                    expected: s.horizon,
                    actual: a.len(),
                });
            }
        }
        Ok(CombinationProblem { samples, actuals, scale })
    }

    pub fn width(&self) -> usize {
        self.samples[0].width
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[ForecastMatrix] {
        &self.samples
    }

    pub fn actuals(&self) -> &[Vec<f64>] {
        &self.actuals
    }

    /// Mean MASE of the blend at `w`. Panics if `w` has the wrong length.
    pub fn objective(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.width(), "weight length");
        let mut buf = Vec::new();
        let total: f64 = self
            .samples
            .iter()
            .zip(&self.actuals)
            .map(|(f, a)| {
                blend_into(f, w, &mut buf);
                self.scale.score_unchecked(a, &buf)
            })
            .sum();
        total / self.samples.len() as f64
    }

    /// Objective as seen by `strategy`: convex weights are normalised first.
    pub fn strategy_objective(&self, strategy: Strategy, w: &[f64]) -> f64 {
        if strategy == Strategy::Convex {
            match normalize(w) {
                Ok(n) => self.objective(&n),
                Err(_) => f64::INFINITY,
            }
        } else {
            self.objective(w)
        }
    }
}

fn normalize(w: &[f64]) -> Result<Vec<f64>> {
    let s: f64 = w.iter().sum();
    if !(s > 0.0) {
        return Err(Error::ZeroWeightSum);
    }
    Ok(w.iter().map(|v| v / s).collect())
}

/// PSO search space for each strategy: unconstrained runs start in
/// `[-1, 2]` with no bounds; the other two search the unit box.
pub fn pso_params_for(strategy: Strategy, width: usize, base: &PsoParams) -> PsoParams {
    match strategy {
        Strategy::Unconstrained => PsoParams {
            bounds: None,
            init_range: Some((-1.0, 2.0)),
            ..base.clone()
        },
        _ => PsoParams {
            bounds: Some(vec![(0.0, 1.0); width]),
            init_range: None,
            ..base.clone()
        },
    }
}

/// Fits weights with PSO. Convex weights are the unit-box optimum divided
/// by its coordinate sum.
pub fn fit_weights_pso(problem: &CombinationProblem, strategy: Strategy, pso: &PsoParams) -> Result<WeightVector> {
    if !strategy.uses_pso() {
        return Err(Error::InvalidParameter(format!("{strategy} is not a PSO strategy")));
    }
    let n = problem.width();
    let params = pso_params_for(strategy, n, pso);
    let (w, _) = swarm::optimize(|w| problem.objective(w), n, &params)?;
    let w = if strategy == Strategy::Convex { normalize(&w)? } else { w };
    Ok(WeightVector::new(w, strategy))
}

pub fn average_weights(n: usize) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(WeightVector::new(vec![1.0 / n as f64; n], Strategy::Average))
}

/// One recursive-ensemble iteration: the candidate weights and their error.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveStep {
    pub weights: Vec<f64>,
    pub error: f64,
    /// Row `i` expresses current model `i` over the original forecasters.
    pub coefficients: Vec<Vec<f64>>,
}

/// Every candidate visited by the recursive ensemble, in order.
pub fn recursive_trace(problem: &CombinationProblem, threshold: f64, max_iterations: usize) -> Result<Vec<RecursiveStep>> {
    let n = problem.width();
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if !(threshold > 0.0) || max_iterations == 0 {
        return Err(Error::InvalidParameter("threshold > 0 and max_iterations >= 1 required".into()));
    }
    let mut coef: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut trace: Vec<RecursiveStep> = Vec::new();
    let mut best = f64::INFINITY;
    for _ in 0..max_iterations {
        let errors: Vec<f64> = coef.iter().map(|row| problem.objective(row)).collect();
        let weights: Vec<f64> = (0..n).map(|j| coef.iter().map(|row| row[j]).sum::<f64>() / n as f64).collect();
        let error = problem.objective(&weights);
        trace.push(RecursiveStep {
            weights,
            error,
            coefficients: coef.clone(),
        });
        let new_best = best.min(error);
        let improvement = best - new_best;
        best = new_best;
        if trace.len() > 1 && improvement < threshold {
            break;
        }
        let mut worst = 0;
        for (i, e) in errors.iter().enumerate() {
            if *e > errors[worst] {
                worst = i;
            }
        }
        let replacement: Vec<f64> = (0..n)
            .map(|j| {
                coef.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != worst)
                    .map(|(_, row)| row[j])
                    .sum::<f64>()
                    / (n - 1) as f64
            })
            .collect();
        coef[worst] = replacement;
    }
    Ok(trace)
}

/// Recursive ensemble: returns the lowest-error candidate (earliest on ties).
pub fn fit_weights_recursive(problem: &CombinationProblem, threshold: f64, max_iterations: usize) -> Result<WeightVector> {
    let trace = recursive_trace(problem, threshold, max_iterations)?;
    let mut best = &trace[0];
    for s in &trace[1..] {
        if s.error < best.error {
            best = s;
        }
    }
    Ok(WeightVector::new(best.weights.clone(), Strategy::Recursive))
}
