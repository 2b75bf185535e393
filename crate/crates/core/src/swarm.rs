//! Particle swarm optimisation with a ring neighbourhood.
//!
//! Each particle owns a ChaCha stream derived from the run seed and its
//! index, so the trajectory does not depend on how fitness evaluations are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub swarm_size: usize,
    /// Ring neighbourhood size including the particle itself. Equal to
    /// `swarm_size` gives the global-best variant.
    pub neighbors: usize,
    pub max_iterations: usize,
    /// Per-dimension `(lo, hi)`; positions are clipped into the box.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Initial position range when unbounded (defaults to `[-1, 1]`).
    pub init_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            swarm_size: 30,
            neighbors: 30,
            max_iterations: 200,
            bounds: None,
            init_range: None,
            seed: 0,
        }
    }
}

impl PsoParams {
    fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if self.swarm_size == 0 || self.neighbors == 0 || self.neighbors > self.swarm_size {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= neighbors ({}) <= swarm_size ({})",
                self.neighbors, self.swarm_size
            )));
        }
        if let Some(b) = &self.bounds {
            if b.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: b.len(),
                });
            }
            if b.iter().any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidParameter("bounds need lo < hi".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub personal_best: Vec<f64>,
    pub personal_best_value: f64,
}

#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    rngs: Vec<ChaCha8Rng>,
    params: PsoParams,
    best_position: Vec<f64>,
    best_value: f64,
    iteration: usize,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl Swarm {
    /// Random initial swarm, evaluated once.
    pub fn new<F>(objective: &F, dim: usize, params: PsoParams) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        params.validate(dim)?;
        let mut rngs: Vec<ChaCha8Rng> = (0..params.swarm_size).map(|i| particle_rng(params.seed, i)).collect();
        let (lo, hi) = params.init_range.unwrap_or((-1.0, 1.0));
        let starts: Vec<(Vec<f64>, Vec<f64>)> = rngs
            .iter_mut()
            .map(|rng| {
                let mut x = Vec::with_capacity(dim);
                let mut v = Vec::with_capacity(dim);
                for d in 0..dim {
                    let (a, b) = params.bounds.as_ref().map_or((lo, hi), |bnd| bnd[d]);
                    x.push(rng.random_range(a..=b));
                    let half = if params.bounds.is_some() { (b - a) / 2.0 } else { 1.0 };
                    v.push(rng.random_range(-half..=half));
                }
                (x, v)
            })
            .collect();
        Self::assemble(objective, starts, rngs, params)
    }

    /// Swarm from explicit starting positions and velocities.
    pub fn from_state<F>(objective: &F, starts: Vec<(Vec<f64>, Vec<f64>)>, params: PsoParams) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let dim = starts.first().map_or(0, |(x, _)| x.len());
        let params = PsoParams {
            swarm_size: starts.len(),
            neighbors: params.neighbors.min(starts.len()),
            ..params
        };
        params.validate(dim)?;
        if starts.iter().any(|(x, v)| x.len() != dim || v.len() != dim) {
            return Err(Error::InvalidParameter("ragged starting state".into()));
        }
        let rngs = (0..starts.len()).map(|i| particle_rng(params.seed, i)).collect();
        Self::assemble(objective, starts, rngs, params)
    }

    fn assemble<F>(
        objective: &F,
        starts: Vec<(Vec<f64>, Vec<f64>)>,
        rngs: Vec<ChaCha8Rng>,
        params: PsoParams,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values = par::map(&starts, |(x, _)| sanitize(objective(x)));
        let particles: Vec<Particle> = starts
            .into_iter()
            .zip(values)
            .map(|((x, v), f)| Particle {
                personal_best: x.clone(),
                position: x,
                velocity: v,
                personal_best_value: f,
            })
            .collect();
        let mut swarm = Swarm {
            best_position: particles[0].personal_best.clone(),
            best_value: f64::INFINITY,
            particles,
            rngs,
            params,
            iteration: 0,
        };
        swarm.refresh_best();
        Ok(swarm)
    }

    fn refresh_best(&mut self) {
        for p in &self.particles {
            if p.personal_best_value < self.best_value {
                self.best_value = p.personal_best_value;
                self.best_position = p.personal_best.clone();
            }
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn params(&self) -> &PsoParams {
        &self.params
    }

    pub fn best_position(&self) -> &[f64] {
        &self.best_position
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Best personal best within particle `i`'s ring neighbourhood. Ties go
    /// to the lowest index so the global-best case is identical for all.
    pub fn neighborhood_best(&self, i: usize) -> &[f64] {
        let s = self.particles.len();
        let k = self.params.neighbors.min(s);
        let back = (k - 1) / 2;
        let mut members: Vec<usize> = (0..k).map(|o| (i + s - back + o) % s).collect();
        members.sort_unstable();
        let mut best = members[0];
        for &j in &members[1..] {
            if self.particles[j].personal_best_value < self.particles[best].personal_best_value {
                best = j;
            }
        }
        &self.particles[best].personal_best
    }

    /// One synchronous iteration using each particle's own generator.
    pub fn step<F>(&mut self, objective: &F)
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut rngs = std::mem::take(&mut self.rngs);
        self.step_with(objective, |i, _| {
            let r1: f64 = rngs[i].random();
            let r2: f64 = rngs[i].random();
            (r1, r2)
        });
        self.rngs = rngs;
    }

    /// One synchronous iteration with `draw(particle, dim) -> (r1, r2)`
    /// supplying the random coefficients.
    pub fn step_with<F, D>(&mut self, objective: &F, mut draw: D)
    where
        F: Fn(&[f64]) -> f64 + Sync,
        D: FnMut(usize, usize) -> (f64, f64),
    {
        let guides: Vec<Vec<f64>> = (0..self.particles.len())
            .map(|i| self.neighborhood_best(i).to_vec())
            .collect();
        let PsoParams {
            inertia,
            cognitive,
            social,
            ..
        } = self.params;
        for (i, (p, g)) in self.particles.iter_mut().zip(&guides).enumerate() {
            for d in 0..p.position.len() {
                let (r1, r2) = draw(i, d);
                let x = p.position[d];
                let v = inertia * p.velocity[d]
                    + cognitive * r1 * (p.personal_best[d] - x)
                    + social * r2 * (g[d] - x);
                let mut nx = x + v;
                let mut nv = v;
                if let Some(bounds) = &self.params.bounds {
                    let (lo, hi) = bounds[d];
                    if nx < lo {
                        nx = lo;
                        nv = 0.0;
                    } else if nx > hi {
                        nx = hi;
                        nv = 0.0;
                    }
                }
                p.position[d] = nx;
                p.velocity[d] = nv;
            }
        }
        let values = par::map(&self.particles, |p| sanitize(objective(&p.position)));
        for (p, f) in self.particles.iter_mut().zip(values) {
            if f < p.personal_best_value {
                p.personal_best_value = f;
                p.personal_best = p.position.clone();
            }
        }
        self.refresh_best();
        self.iteration += 1;
    }

    /// Runs the remaining iterations and returns the best point found.
    pub fn run<F>(mut self, objective: &F) -> (Vec<f64>, f64)
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        while self.iteration < self.params.max_iterations {
            self.step(objective);
        }
        (self.best_position, self.best_value)
    }
}

/// Minimises `objective` over `dim` dimensions.
pub fn optimize<F>(objective: F, dim: usize, params: &PsoParams) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(Swarm::new(&objective, dim, params.clone())?.run(&objective))
}
