//! Epsilon-insensitive support vector regression with an RBF kernel,
//! trained by second-order working-set SMO on the 2N-variable dual.

use serde::{Deserialize, Serialize};

use super::DesignMatrix;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub gamma: f64,
    pub epsilon: f64,
    pub c: f64,
    /// KKT violation tolerance used as the stopping rule.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            gamma: 0.1,
            epsilon: 0.1,
            c: 1.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

impl SvrParams {
    pub fn new(gamma: f64, epsilon: f64, c: f64) -> Self {
        SvrParams {
            gamma,
            epsilon,
            c,
            ..SvrParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Standardized support vectors.
    support_vectors: Vec<Vec<f64>>,
    /// Training-row index of each support vector.
    support_indices: Vec<usize>,
    dual_coefficients: Vec<f64>,
    bias: f64,
    gamma: f64,
    epsilon: f64,
    c: f64,
    means: Vec<f64>,
    scales: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn column_scaling(rows: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let scales = (0..width)
        .map(|j| {
            let var = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (means, scales)
}

fn standardize(row: &[f64], means: &[f64], scales: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(means.iter().zip(scales))
        .map(|(v, (m, s))| (v - m) / s)
        .collect()
}

pub fn fit_svr(x: &DesignMatrix, params: &SvrParams) -> Result<SvrModel> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientHistory { needed: 2, available: n });
    }
    let SvrParams { gamma, epsilon, c, tol, max_iter } = *params;
    if !(gamma > 0.0) || !(c > 0.0) || !(epsilon >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "svr requires gamma > 0, C > 0, epsilon >= 0 (got {gamma}, {c}, {epsilon})"
        )));
    }
    let width = x.width();
    let (means, scales) = column_scaling(x.rows(), width);
    let z: Vec<Vec<f64>> = x.rows().iter().map(|r| standardize(r, &means, &scales)).collect();
    let kernel: Vec<Vec<f64>> = par::map_range(n, |i| (0..n).map(|j| rbf(&z[i], &z[j], gamma)).collect());
    let target = x.targets();

    // Variables 0..n carry sign +1, n..2n carry sign -1; both map to row t % n.
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let row = |t: usize| if t < n { t } else { t - n };
    let mut alpha = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { epsilon - target[t] } else { epsilon + target[t - n] })
        .collect();
    let q = |a: usize, b: usize| sign(a) * sign(b) * kernel[row(a)][row(b)];
    let is_up = |t: usize, a: &[f64]| if t < n { a[t] < c } else { a[t] > 0.0 };
    let is_low = |t: usize, a: &[f64]| if t < n { a[t] > 0.0 } else { a[t] < c };
    const TAU: f64 = 1e-12;

    let mut iter = 0;
    loop {
        // Maximal violating pair with second-order choice of the partner.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            if is_up(t, &alpha) {
                let v = -sign(t) * grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..l {
            if !is_low(t, &alpha) {
                continue;
            }
            let v = sign(t) * grad[t];
            gmax2 = gmax2.max(v);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + v;
            if b > 0.0 {
                let a = kernel[row(i)][row(i)] + kernel[row(t)][row(t)] - 2.0 * sign(i) * sign(t) * q(i, t);
                let a = if a > 0.0 { a } else { TAU };
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || i == usize::MAX || j == usize::MAX {
            break;
        }
        if iter >= max_iter {
            return Err(Error::NonConvergence(format!("svr solver hit {max_iter} iterations")));
        }
        iter += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qii = kernel[row(i)][row(i)];
        let qjj = kernel[row(j)][row(j)];
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (ri, rj) = (row(i), row(j));
        let (si, sj) = (sign(i), sign(j));
        for (t, g) in grad.iter_mut().enumerate() {
            let st = sign(t);
            let rt = row(t);
            *g += st * (si * kernel[rt][ri] * di + sj * kernel[rt][rj] * dj);
        }
    }

    // Offset: average over free variables, else the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };

    let mut support_vectors = Vec::new();
    let mut support_indices = Vec::new();
    let mut dual_coefficients = Vec::new();
    for r in 0..n {
        let coef = alpha[r] - alpha[r + n];
        if coef != 0.0 {
            support_vectors.push(z[r].clone());
            support_indices.push(r);
            dual_coefficients.push(coef);
        }
    }
    log::debug!("svr: n={n} iterations={iter} support={}", support_vectors.len());
    Ok(SvrModel {
        support_vectors,
        support_indices,
        dual_coefficients,
        bias: -rho,
        gamma,
        epsilon,
        c,
        means,
        scales,
    })
}

impl SvrModel {
    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }

    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual_coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn feature_scaling(&self) -> (&[f64], &[f64]) {
        (&self.means, &self.scales)
    }

    /// Raw regression output, without the non-negativity clamp.
    pub fn decision_function(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        let r = self.means.len();
        features
            .iter()
            .map(|row| {
                if row.len() != r {
                    return Err(Error::DimensionMismatch {
                        expected: r,
                        actual: row.len(),
                    });
                }
                let z = standardize(row, &self.means, &self.scales);
                Ok(self
                    .support_vectors
                    .iter()
                    .zip(&self.dual_coefficients)
                    .map(|(sv, a)| a * rbf(sv, &z, self.gamma))
                    .sum::<f64>()
                    + self.bias)
            })
            .collect()
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        predict_svr(self, features)
    }
}

pub fn predict_svr(model: &SvrModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    Ok(model
        .decision_function(features)?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect())
}
