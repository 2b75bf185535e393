//! Random hyperparameter search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dimension {
    Uniform { lo: f64, hi: f64 },
    LogUniform { lo: f64, hi: f64 },
    Choice { values: Vec<f64> },
}

impl Dimension {
    fn validate(&self) -> Result<()> {
        match self {
            Dimension::Uniform { lo, hi } if lo < hi => Ok(()),
            Dimension::LogUniform { lo, hi } if *lo > 0.0 && lo < hi => Ok(()),
            Dimension::Choice { values } if !values.is_empty() => Ok(()),
            other => Err(Error::InvalidParameter(format!("bad search dimension {other:?}"))),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Dimension::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Dimension::LogUniform { lo, hi } => {
                let (a, b) = (lo.ln(), hi.ln());
                (a + (b - a) * rng.random::<f64>()).exp()
            }
            Dimension::Choice { values } => values[rng.random_range(0..values.len())],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    dims: Vec<(String, Dimension)>,
}

impl SearchSpace {
    pub fn new() -> Self {
        SearchSpace::default()
    }

    pub fn with(mut self, name: &str, dim: Dimension) -> Self {
        self.dims.push((name.to_string(), dim));
        self
    }

    pub fn dimensions(&self) -> &[(String, Dimension)] {
        &self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// SVR: RBF width and tube half-width.
    pub fn svr() -> Self {
        SearchSpace::new()
            .with("gamma", Dimension::LogUniform { lo: 1e-4, hi: 10.0 })
            .with("epsilon", Dimension::Uniform { lo: 1e-3, hi: 0.5 })
    }

    /// PSO: acceleration constants, inertia and ring neighbourhood size.
    pub fn pso(swarm_size: usize) -> Self {
        let mut hoods: Vec<f64> = [3, 5, swarm_size]
            .into_iter()
            .filter(|&k| k <= swarm_size)
            .map(|k| k as f64)
            .collect();
        hoods.dedup();
        SearchSpace::new()
            .with("c1", Dimension::Uniform { lo: 0.5, hi: 2.5 })
            .with("c2", Dimension::Uniform { lo: 0.5, hi: 2.5 })
            .with("inertia", Dimension::Uniform { lo: 0.3, hi: 0.95 })
            .with("neighbors", Dimension::Choice { values: hoods })
    }

    /// Recursive ensemble stopping threshold.
    pub fn recursive() -> Self {
        SearchSpace::new().with("threshold", Dimension::LogUniform { lo: 1e-5, hi: 0.1 })
    }

    /// `count` points drawn from a single stream seeded by `seed`.
    pub fn draw(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        if self.dims.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (_, d) in &self.dims {
            d.validate()?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| Point {
                values: self
                    .dims
                    .iter()
                    .map(|(name, d)| (name.clone(), d.sample(&mut rng)))
                    .collect(),
            })
            .collect())
    }
}

/// One sampled parameter combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    values: Vec<(String, f64)>,
}

impl Point {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn values(&self) -> &[(String, f64)] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Point,
    pub best_value: f64,
    /// Every evaluated point with its score, in draw order.
    pub history: Vec<(Point, f64)>,
}

/// Evaluates `iterations` random points and keeps the lowest score; ties
/// go to the earliest draw. Non-finite scores count as `+inf`.
pub fn random_search<F>(space: &SearchSpace, evaluate: F, iterations: usize, seed: u64) -> Result<SearchResult>
where
    F: Fn(&Point) -> f64 + Sync,
{
    if iterations == 0 {
        return Err(Error::InvalidParameter("random search needs at least one iteration".into()));
    }
    let points = space.draw(iterations, seed)?;
    let scores = par::map(&points, |p| {
        let v = evaluate(p);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    });
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok(SearchResult {
        best: points[best].clone(),
        best_value: scores[best],
        history: points.into_iter().zip(scores).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn identity_matches_regenerated_draws() {
        let space = SearchSpace::new().with("x", Dimension::Uniform { lo: 0.0, hi: 1.0 });
        let res = random_search(&space, |p| p.get("x").unwrap(), 10, 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let expected = (0..10).map(|_| rng.random::<f64>()).fold(f64::INFINITY, f64::min);
        assert_eq!(res.best_value, expected);
        assert!(res.history.iter().all(|(_, v)| res.best_value <= *v));
    }

    #[test]
    fn single_point_space() {
        let space = SearchSpace::new().with("k", Dimension::Choice { values: vec![4.0] });
        let res = random_search(&space, |p| p.get("k").unwrap() * 2.0, 1, 0).unwrap();
        assert_eq!(res.best.get("k"), Some(4.0));
        assert_eq!(res.best_value, 8.0);
    }

    #[test]
    fn counts_and_empty_space() {
        let calls = AtomicUsize::new(0);
        let space = SearchSpace::svr();
        random_search(
            &space,
            |_| {
                calls.fetch_add(1, Ordering::Relaxed);
                1.0
            },
            13,
            1,
        )
        .unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 13);
        assert_eq!(random_search(&SearchSpace::new(), |_| 0.0, 3, 0).unwrap_err(), Error::EmptySpace);
    }

    #[test]
    fn log_and_choice_ranges() {
        for p in SearchSpace::svr().draw(200, 3).unwrap() {
            let g = p.get("gamma").unwrap();
            assert!((1e-4..=10.0).contains(&g));
        }
        for p in SearchSpace::pso(20).draw(50, 3).unwrap() {
            assert!([3.0, 5.0, 20.0].contains(&p.get("neighbors").unwrap()));
        }
    }

    #[test]
    fn non_finite_scores_never_win() {
        let space = SearchSpace::new().with("x", Dimension::Uniform { lo: 0.0, hi: 1.0 });
        let res = random_search(&space, |p| if p.get("x").unwrap() < 0.5 { f64::NAN } else { 1.0 }, 20, 4).unwrap();
        assert_eq!(res.best_value, 1.0);
    }

    #[test]
    fn more_iterations_never_worse() {
        let space = SearchSpace::recursive();
        let f = |p: &Point| (p.get("threshold").unwrap().ln() + 7.0).abs();
        let mut prev = f64::INFINITY;
        for n in [1, 5, 10, 40] {
            let r = random_search(&space, f, n, 8).unwrap();
            assert!(r.best_value <= prev);
            prev = r.best_value;
        }
    }
}
