//! Seasonal ARIMA with optional regression on exogenous inputs, estimated by
//! conditional sum of squares.
//!
//! The model on the differenced scale is
//!
//! ```text
//! u_t = y'_t - x'_t β
//! φ(B) Φ(B^m) u_t = c + θ(B) Θ(B^m) ε_t
//! ```
//!
//! For fixed ARMA coefficients the residuals are linear in `(c, β)`, so those
//! are profiled out by least squares and the simplex search only runs over the
//! ARMA coefficients.

use serde::{Deserialize, Serialize};

use super::diff::{difference, undifference};
use super::optim::{nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};
use crate::linalg;

/// Orders of a seasonal ARIMA model, `(p, d, q)(P, D, Q)_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    pub period: usize,
}

impl ArimaOrder {
    pub const MAX_P: usize = 5;
    pub const MAX_Q: usize = 5;
    pub const MAX_SEASONAL_P: usize = 2;
    pub const MAX_SEASONAL_Q: usize = 2;

    pub fn new(p: usize, d: usize, q: usize) -> Self {
        ArimaOrder {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            period: 1,
        }
    }

    pub fn seasonal(mut self, seasonal_p: usize, seasonal_d: usize, seasonal_q: usize, period: usize) -> Self {
        self.seasonal_p = seasonal_p;
        self.seasonal_d = seasonal_d;
        self.seasonal_q = seasonal_q;
        self.period = period;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("{msg}: {self:?}")));
        if self.period == 0 {
            return bad("seasonal period must be >= 1");
        }
        if self.d + self.seasonal_d > 3 {
            return bad("total differencing exceeds 3");
        }
        if self.p > Self::MAX_P || self.q > Self::MAX_Q {
            return bad("non-seasonal order out of range");
        }
        if self.seasonal_p > Self::MAX_SEASONAL_P || self.seasonal_q > Self::MAX_SEASONAL_Q {
            return bad("seasonal order out of range");
        }
        if self.period == 1 && self.seasonal_p + self.seasonal_d + self.seasonal_q > 0 {
            return bad("seasonal terms need a period > 1");
        }
        Ok(())
    }

    /// Points consumed by differencing.
    pub fn diff_loss(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    pub fn max_ar_lag(&self) -> usize {
        self.p + self.seasonal_p * self.period
    }

    pub fn max_ma_lag(&self) -> usize {
        self.q + self.seasonal_q * self.period
    }

    pub fn arma_dim(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if self.period > 1 {
            write!(
                f,
                "({},{},{})[{}]",
                self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
            )?;
        }
        Ok(())
    }
}

/// Coefficients in the sign convention `y' = c + Σφ y'_{t-i} + Σθ ε_{t-i} + ε_t`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArimaCoefficients {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    pub constant: f64,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub include_constant: bool,
    pub optimizer: NelderMeadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            include_constant: true,
            optimizer: NelderMeadOptions::default(),
        }
    }
}

/// A fitted (or hand-specified) model plus the state needed to forecast
/// from the end of its data.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    order: ArimaOrder,
    include_constant: bool,
    coef: ArimaCoefficients,
    sigma2: f64,
    css: f64,
    n_used: usize,
    residuals: Vec<f64>,
    tail: ForecastState,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct ForecastState {
    /// Original-scale observations, last `diff_loss` of them.
    y: Vec<f64>,
    /// Regression errors on the differenced scale.
    u: Vec<f64>,
    /// Innovations aligned with `u`.
    e: Vec<f64>,
    /// Trailing exogenous rows (one Vec per column) used to difference future inputs.
    x: Vec<Vec<f64>>,
}

/// Expanded lag polynomials as sparse `(lag, coefficient)` lists:
/// `u_t = Σ ar_k u_{t-k} + Σ ma_k ε_{t-k} + c + ε_t`.
#[derive(Debug, Clone, Default)]
struct Lags {
    ar: Vec<(usize, f64)>,
    ma: Vec<(usize, f64)>,
}

fn expand_ar(nonseasonal: &[f64], seasonal: &[f64], m: usize) -> Vec<(usize, f64)> {
    // (1 - Σφ_i B^i)(1 - ΣΦ_j B^{jm}) = 1 - Σ a_k B^k
    let mut poly = vec![0.0; nonseasonal.len() + seasonal.len() * m + 1];
    poly[0] = 1.0;
    for (i, &p) in nonseasonal.iter().enumerate() {
        poly[i + 1] -= p;
    }
    let base = poly.clone();
    for (j, &s) in seasonal.iter().enumerate() {
        let shift = (j + 1) * m;
        for (k, &b) in base.iter().enumerate() {
            if b != 0.0 && k + shift < poly.len() {
                poly[k + shift] -= s * b;
            }
        }
    }
    poly.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &v)| v != 0.0)
        .map(|(k, &v)| (k, -v))
        .collect()
}

fn expand_ma(nonseasonal: &[f64], seasonal: &[f64], m: usize) -> Vec<(usize, f64)> {
    // (1 + Σθ_i B^i)(1 + ΣΘ_j B^{jm}) = 1 + Σ b_k B^k
    let mut poly = vec![0.0; nonseasonal.len() + seasonal.len() * m + 1];
    poly[0] = 1.0;
    for (i, &t) in nonseasonal.iter().enumerate() {
        poly[i + 1] += t;
    }
    let base = poly.clone();
    for (j, &s) in seasonal.iter().enumerate() {
        let shift = (j + 1) * m;
        for (k, &b) in base.iter().enumerate() {
            if b != 0.0 && k + shift < poly.len() {
                poly[k + shift] += s * b;
            }
        }
    }
    poly.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &v)| v != 0.0)
        .map(|(k, &v)| (k, v))
        .collect()
}

/// True when `1 - Σ a_k z^k` has all roots strictly outside the unit circle,
/// checked through the step-down (reverse Levinson) recursion.
pub fn is_stationary(a: &[f64]) -> bool {
    let mut cur: Vec<f64> = a.to_vec();
    while let Some(&last) = cur.last() {
        if last == 0.0 {
            cur.pop();
        } else {
            break;
        }
    }
    while !cur.is_empty() {
        let k = cur.len();
        let kappa = cur[k - 1];
        if !kappa.is_finite() || kappa.abs() >= 1.0 - 1e-7 {
            return false;
        }
        let denom = 1.0 - kappa * kappa;
        let next: Vec<f64> = (0..k - 1)
            .map(|j| (cur[j] + kappa * cur[k - 2 - j]) / denom)
            .collect();
        cur = next;
    }
    true
}

/// True when `1 + Σ θ_k z^k` has all roots strictly outside the unit circle.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_stationary(&neg)
}

fn split_params(order: &ArimaOrder, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (p, q, sp) = (order.p, order.q, order.seasonal_p);
    (
        x[..p].to_vec(),
        x[p..p + q].to_vec(),
        x[p + q..p + q + sp].to_vec(),
        x[p + q + sp..].to_vec(),
    )
}

fn admissible(phi: &[f64], theta: &[f64], sphi: &[f64], stheta: &[f64]) -> bool {
    is_stationary(phi) && is_stationary(sphi) && is_invertible(theta) && is_invertible(stheta)
}

/// AR filter `v_t - Σ a_k v_{t-k}` for `t >= t0`, then MA inversion
/// `w_t = g_t - Σ b_k w_{t-k}` with zero start-up values.
fn filter_into(v: &[f64], lags: &Lags, t0: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(v.len(), 0.0);
    for t in t0..v.len() {
        let mut g = v[t];
        for &(k, a) in &lags.ar {
            g -= a * v[t - k];
        }
        for &(k, b) in &lags.ma {
            if t >= k + t0 {
                g -= b * out[t - k];
            }
        }
        out[t] = g;
    }
}

/// Same filter applied to the constant series of ones.
fn filter_ones(n: usize, lags: &Lags, t0: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(n, 0.0);
    for t in t0..n {
        let mut g = 1.0;
        for &(k, b) in &lags.ma {
            if t >= k + t0 {
                g -= b * out[t - k];
            }
        }
        out[t] = g;
    }
}

/// Data prepared once per fit: differenced response and regressors.
struct Problem<'a> {
    order: ArimaOrder,
    include_constant: bool,
    yd: &'a [f64],
    xd: &'a [Vec<f64>],
}

struct Profiled {
    css: f64,
    constant: f64,
    beta: Vec<f64>,
    n_used: usize,
}

impl Problem<'_> {
    fn t0(&self) -> usize {
        self.order.max_ar_lag()
    }

    fn profile(&self, params: &[f64]) -> Option<Profiled> {
        let (phi, theta, sphi, stheta) = split_params(&self.order, params);
        if !admissible(&phi, &theta, &sphi, &stheta) {
            return None;
        }
        let m = self.order.period;
        let lags = Lags {
            ar: expand_ar(&phi, &sphi, m),
            ma: expand_ma(&theta, &stheta, m),
        };
        let t0 = self.t0();
        let n = self.yd.len();
        let mut z0 = Vec::new();
        filter_into(self.yd, &lags, t0, &mut z0);
        let mut regs: Vec<Vec<f64>> = Vec::new();
        if self.include_constant {
            let mut ones = Vec::new();
            filter_ones(n, &lags, t0, &mut ones);
            regs.push(ones);
        }
        for col in self.xd {
            let mut z = Vec::new();
            filter_into(col, &lags, t0, &mut z);
            regs.push(z);
        }
        let k = regs.len();
        let coef = if k == 0 {
            Vec::new()
        } else {
            let mut gram = vec![0.0; k * k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                for j in 0..=i {
                    let s = linalg::dot(&regs[i][t0..], &regs[j][t0..]);
                    gram[i * k + j] = s;
                    gram[j * k + i] = s;
                }
                rhs[i] = linalg::dot(&regs[i][t0..], &z0[t0..]);
            }
            linalg::solve_spd(&gram, &rhs, k)?
        };
        let mut css = 0.0;
        for t in t0..n {
            let mut e = z0[t];
            for (r, c) in regs.iter().zip(&coef) {
                e -= c * r[t];
            }
            css += e * e;
        }
        let (constant, beta) = if self.include_constant {
            (coef[0], coef[1..].to_vec())
        } else {
            (0.0, coef)
        };
        css.is_finite().then_some(Profiled {
            css,
            constant,
            beta,
            n_used: n - t0,
        })
    }

    fn objective(&self, params: &[f64]) -> f64 {
        self.profile(params).map_or(f64::INFINITY, |p| p.css)
    }

    /// Hannan–Rissanen start: long autoregression for innovations, then a
    /// regression of the series on its own lags and lagged innovations.
    fn hannan_rissanen(&self) -> Option<Vec<f64>> {
        let (p, q) = (self.order.p, self.order.q);
        if p + q == 0 {
            return None;
        }
        // remove mean / regression part first
        let u = self.regression_residuals()?;
        let n = u.len();
        let long = (p.max(q) + 4).min(n / 4);
        if long == 0 || n < long + q + p + 10 {
            return None;
        }
        let mut innov = vec![0.0; n];
        {
            let cols: Vec<Vec<f64>> = (1..=long).map(|l| u[long - l..n - l].to_vec()).collect();
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            let a = linalg::least_squares(&refs, &u[long..]).ok()?;
            for t in long..n {
                let fit: f64 = (1..=long).map(|l| a[l - 1] * u[t - l]).sum();
                innov[t] = u[t] - fit;
            }
        }
        let start = long + p.max(q);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p + q);
        for l in 1..=p {
            cols.push((start..n).map(|t| u[t - l]).collect());
        }
        for l in 1..=q {
            cols.push((start..n).map(|t| innov[t - l]).collect());
        }
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let b = linalg::least_squares(&refs, &u[start..]).ok()?;
        let mut x = b;
        x.extend(std::iter::repeat_n(0.0, self.order.seasonal_p + self.order.seasonal_q));
        let (phi, theta, sphi, stheta) = split_params(&self.order, &x);
        admissible(&phi, &theta, &sphi, &stheta).then_some(x)
    }

    fn n_regressors(&self) -> usize {
        self.xd.len() + usize::from(self.include_constant)
    }

    /// OLS regression coefficients, constant first when included.
    fn ols(&self) -> Option<Vec<f64>> {
        let ones = vec![1.0; self.yd.len()];
        let mut cols: Vec<&[f64]> = Vec::new();
        if self.include_constant {
            cols.push(&ones);
        }
        cols.extend(self.xd.iter().map(|c| c.as_slice()));
        if cols.is_empty() {
            return Some(Vec::new());
        }
        linalg::least_squares(&cols, self.yd).ok()
    }

    /// `yd` minus the regression part for coefficients laid out like [`Problem::ols`].
    fn residuals_with(&self, coef: &[f64]) -> Vec<f64> {
        let mut u = self.yd.to_vec();
        let mut rest = coef;
        if self.include_constant {
            for v in &mut u {
                *v -= coef[0];
            }
            rest = &coef[1..];
        }
        for (col, b) in self.xd.iter().zip(rest) {
            for (v, x) in u.iter_mut().zip(col) {
                *v -= b * x;
            }
        }
        u
    }

    fn regression_residuals(&self) -> Option<Vec<f64>> {
        Some(self.residuals_with(&self.ols()?))
    }
}

/// Lowest objective reached by Nelder–Mead from any of `starts`.
fn best_start(problem: &Problem, starts: &[Vec<f64>], opts: &NelderMeadOptions) -> Option<Vec<f64>> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let res = nelder_mead(|x| problem.objective(x), s, opts);
        if res.value.is_finite() && best.as_ref().is_none_or(|(_, v)| res.value < *v) {
            best = Some((res.x, res.value));
        }
    }
    best.map(|(x, _)| x)
}

const MAX_ROUNDS: usize = 8;

/// Approaches the joint CSS minimum by alternating Nelder–Mead over the ARMA
/// part with the regression held fixed and the GLS regression for that ARMA
/// part. Each ARMA evaluation filters a single series, so this is far cheaper
/// than the profiled objective; it can stall when the two blocks are
/// strongly coupled, so the caller finishes with a joint search from here.
fn alternate(problem: &Problem, opts: &NelderMeadOptions) -> Option<Vec<f64>> {
    let mut coef = problem.ols()?;
    let mut params: Option<Vec<f64>> = None;
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_ROUNDS {
        let u = problem.residuals_with(&coef);
        let fixed = Problem {
            order: problem.order,
            include_constant: false,
            yd: &u,
            xd: &[],
        };
        let starts = match &params {
            Some(p) => vec![p.clone()],
            None => {
                let mut s = vec![vec![0.0; problem.order.arma_dim()]];
                s.extend(fixed.hannan_rissanen());
                s
            }
        };
        let x = best_start(&fixed, &starts, opts)?;
        let prof = problem.profile(&x)?;
        coef = if problem.include_constant {
            std::iter::once(prof.constant).chain(prof.beta.iter().copied()).collect()
        } else {
            prof.beta.clone()
        };
        params = Some(x);
        if prev - prof.css <= 1e-10 * prof.css.abs() {
            break;
        }
        prev = prof.css;
    }
    params
}

fn check_exog(exog: Option<&[Vec<f64>]>, n: usize) -> Result<&[Vec<f64>]> {
    let cols = exog.unwrap_or(&[]);
    for c in cols {
        if c.len() < n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: c.len(),
            });
        }
    }
    Ok(cols)
}

/// Fits a seasonal ARIMA(X) model to `y` by conditional sum of squares.
///
/// `exog` holds one column per regressor, each at least as long as `y`
/// (extra trailing rows are ignored).
pub fn fit_arima(
    y: &[f64],
    order: ArimaOrder,
    exog: Option<&[Vec<f64>]>,
    opts: &FitOptions,
) -> Result<ArimaModel> {
    order.validate()?;
    let n = y.len();
    let exog = check_exog(exog, n)?;
    let r = exog.len();
    let needed = order.diff_loss() + order.max_ar_lag().max(order.max_ma_lag()) + r + 2;
    if n < needed {
        return Err(Error::InsufficientHistory {
            needed,
            available: n,
        });
    }
    let (d, sd, m) = (order.d, order.seasonal_d, order.period);
    let yd = difference(y, d, sd, m)?;
    let xd: Vec<Vec<f64>> = exog
        .iter()
        .map(|c| difference(&c[..n], d, sd, m))
        .collect::<Result<_>>()?;
    if !xd.is_empty() {
        let ones = vec![1.0; yd.len()];
        let mut cols: Vec<&[f64]> = Vec::new();
        if opts.include_constant {
            cols.push(&ones);
        }
        cols.extend(xd.iter().map(|c| c.as_slice()));
        if linalg::least_squares(&cols, &yd).is_err() {
            return Err(Error::SingularDesign);
        }
    }
    let problem = Problem {
        order,
        include_constant: opts.include_constant,
        yd: &yd,
        xd: &xd,
    };

    let dim = order.arma_dim();
    let no_fit = || Error::NonConvergence(format!("no finite CSS objective for order {order}"));
    let params = if dim == 0 || problem.n_regressors() == 0 {
        let mut starts = vec![vec![0.0; dim]];
        starts.extend(problem.hannan_rissanen());
        best_start(&problem, &starts, &opts.optimizer).ok_or_else(no_fit)?
    } else {
        let near = alternate(&problem, &opts.optimizer).ok_or_else(no_fit)?;
        best_start(&problem, &[near], &opts.optimizer).ok_or_else(no_fit)?
    };
    let prof = problem
        .profile(&params)
        .ok_or_else(|| Error::NonConvergence(format!("inadmissible optimum for {order}")))?;
    let (phi, theta, sphi, stheta) = split_params(&order, &params);
    let coef = ArimaCoefficients {
        phi,
        theta,
        seasonal_phi: sphi,
        seasonal_theta: stheta,
        constant: prof.constant,
        beta: prof.beta,
    };
    let mut model = ArimaModel {
        order,
        include_constant: opts.include_constant,
        coef,
        sigma2: 0.0,
        css: prof.css,
        n_used: prof.n_used,
        residuals: Vec::new(),
        tail: ForecastState::default(),
    };
    model.attach_history(y, Some(exog))?;
    model.sigma2 = prof.css / prof.n_used.max(1) as f64;
    Ok(model)
}

/// Innovations and regression errors over a full history.
#[derive(Debug, Clone)]
pub struct ResidualPass {
    /// Regression errors on the differenced scale; index `j` is original index `j + diff_loss`.
    pub u: Vec<f64>,
    /// Innovations aligned with `u` (zero during the conditioning period).
    pub e: Vec<f64>,
}

impl ArimaModel {
    /// Builds a model from known coefficients and runs it over `history` so
    /// it can forecast from the end of that history.
    pub fn from_coefficients(
        order: ArimaOrder,
        coef: ArimaCoefficients,
        history: &[f64],
        exog: Option<&[Vec<f64>]>,
    ) -> Result<Self> {
        order.validate()?;
        let check = |v: &[f64], n: usize, what: &str| {
            if v.len() != n {
                Err(Error::InvalidParameter(format!("{what} has {} coefficients, order needs {n}", v.len())))
            } else {
                Ok(())
            }
        };
        check(&coef.phi, order.p, "phi")?;
        check(&coef.theta, order.q, "theta")?;
        check(&coef.seasonal_phi, order.seasonal_p, "seasonal phi")?;
        check(&coef.seasonal_theta, order.seasonal_q, "seasonal theta")?;
        let r = exog.map_or(0, |x| x.len());
        check(&coef.beta, r, "beta")?;
        let mut model = ArimaModel {
            order,
            include_constant: coef.constant != 0.0,
            coef,
            sigma2: 0.0,
            css: 0.0,
            n_used: 0,
            residuals: Vec::new(),
            tail: ForecastState::default(),
        };
        model.attach_history(history, exog)?;
        let t0 = order.max_ar_lag();
        let used = &model.residuals[t0.min(model.residuals.len())..];
        model.css = used.iter().map(|e| e * e).sum();
        model.n_used = used.len();
        model.sigma2 = model.css / used.len().max(1) as f64;
        Ok(model)
    }

    fn attach_history(&mut self, y: &[f64], exog: Option<&[Vec<f64>]>) -> Result<()> {
        let pass = self.residual_pass(y, exog)?;
        let s = self.order.diff_loss();
        let n = y.len();
        // u and e tails stay index-aligned
        let keep = self.order.max_ar_lag().max(self.order.max_ma_lag());
        self.tail = ForecastState {
            y: y[n - s..].to_vec(),
            u: pass.u[pass.u.len().saturating_sub(keep)..].to_vec(),
            e: pass.e[pass.e.len().saturating_sub(keep)..].to_vec(),
            x: exog
                .unwrap_or(&[])
                .iter()
                .map(|c| c[n - s..n].to_vec())
                .collect(),
        };
        self.residuals = pass.e;
        Ok(())
    }

    pub fn order(&self) -> ArimaOrder {
        self.order
    }

    pub fn coefficients(&self) -> &ArimaCoefficients {
        &self.coef
    }

    pub fn includes_constant(&self) -> bool {
        self.include_constant
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn css(&self) -> f64 {
        self.css
    }

    /// Innovations on the differenced scale (zero during conditioning).
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn n_exogenous(&self) -> usize {
        self.coef.beta.len()
    }

    /// Number of estimated parameters, including the innovation variance.
    pub fn n_params(&self) -> usize {
        self.order.arma_dim() + usize::from(self.include_constant) + self.coef.beta.len() + 1
    }

    /// Gaussian log-likelihood implied by the conditional sum of squares.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.n_used as f64;
        let sigma2 = self.css / n;
        -0.5 * n * ((std::f64::consts::TAU * sigma2).ln() + 1.0)
    }

    /// Corrected Akaike information criterion.
    pub fn aicc(&self) -> f64 {
        let k = self.n_params() as f64;
        let n = self.n_used as f64;
        if n - k - 1.0 <= 0.0 {
            return f64::INFINITY;
        }
        -2.0 * self.log_likelihood() + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0)
    }

    fn lags(&self) -> Lags {
        let m = self.order.period;
        Lags {
            ar: expand_ar(&self.coef.phi, &self.coef.seasonal_phi, m),
            ma: expand_ma(&self.coef.theta, &self.coef.seasonal_theta, m),
        }
    }

    /// Runs the model over `y`, computing regression errors and innovations.
    /// Each value depends only on observations at or before its own index.
    pub fn residual_pass(&self, y: &[f64], exog: Option<&[Vec<f64>]>) -> Result<ResidualPass> {
        let n = y.len();
        let exog = check_exog(exog, n)?;
        if exog.len() != self.coef.beta.len() {
            return Err(if exog.is_empty() {
                Error::MissingExogenous
            } else {
                Error::DimensionMismatch {
                    expected: self.coef.beta.len(),
                    actual: exog.len(),
                }
            });
        }
        let (d, sd, m) = (self.order.d, self.order.seasonal_d, self.order.period);
        let mut u = difference(y, d, sd, m)?;
        for (col, b) in exog.iter().zip(&self.coef.beta) {
            let xd = difference(&col[..n], d, sd, m)?;
            for (ui, xi) in u.iter_mut().zip(&xd) {
                *ui -= b * xi;
            }
        }
        let lags = self.lags();
        let t0 = self.order.max_ar_lag();
        let mut e = vec![0.0; u.len()];
        for t in t0..u.len() {
            let mut v = u[t] - self.coef.constant;
            for &(k, a) in &lags.ar {
                v -= a * u[t - k];
            }
            for &(k, b) in &lags.ma {
                if t >= k + t0 {
                    v -= b * e[t - k];
                }
            }
            e[t] = v;
        }
        Ok(ResidualPass { u, e })
    }

    /// Forecasts `h` steps past the end of the data the model was fitted (or
    /// initialised) on. `exog_future` holds one column of length `h` per regressor.
    pub fn forecast(&self, h: usize, exog_future: Option<&[Vec<f64>]>) -> Result<Vec<f64>> {
        let r = self.coef.beta.len();
        let xd_future = match (r, exog_future) {
            (0, None) => Vec::new(),
            (0, Some([])) => Vec::new(),
            (0, Some(x)) => {
                return Err(Error::DimensionMismatch {
                    expected: 0,
                    actual: x.len(),
                })
            }
            (_, None) => return Err(Error::MissingExogenous),
            (_, Some(x)) => {
                if x.len() != r {
                    return Err(Error::DimensionMismatch {
                        expected: r,
                        actual: x.len(),
                    });
                }
                let mut out = Vec::with_capacity(r);
                for (tail, fut) in self.tail.x.iter().zip(x) {
                    if fut.len() < h {
                        return Err(Error::LengthMismatch {
                            expected: h,
                            actual: fut.len(),
                        });
                    }
                    out.push(self.future_diffs(tail, &fut[..h])?);
                }
                out
            }
        };
        self.recurse(&self.tail.u, &self.tail.e, &self.tail.y, &xd_future, h)
    }

    fn future_diffs(&self, tail: &[f64], future: &[f64]) -> Result<Vec<f64>> {
        let mut joined = tail.to_vec();
        joined.extend_from_slice(future);
        let s = self.order.diff_loss();
        if s == 0 {
            return Ok(future.to_vec());
        }
        difference(&joined, self.order.d, self.order.seasonal_d, self.order.period)
    }

    /// Forecasts `h` steps starting at original index `cutoff` using a
    /// precomputed residual pass over a history that covers at least `cutoff`
    /// observations. Only values before `cutoff` are read from `y` and the pass.
    pub fn forecast_at(
        &self,
        y: &[f64],
        pass: &ResidualPass,
        exog: Option<&[Vec<f64>]>,
        cutoff: usize,
        h: usize,
    ) -> Result<Vec<f64>> {
        let s = self.order.diff_loss();
        if cutoff < s || cutoff > y.len() {
            return Err(Error::InsufficientHistory {
                needed: s,
                available: cutoff.min(y.len()),
            });
        }
        let j = cutoff - s;
        let r = self.coef.beta.len();
        let mut xd_future = Vec::with_capacity(r);
        if r > 0 {
            let cols = exog.ok_or(Error::MissingExogenous)?;
            for col in cols {
                if col.len() < cutoff + h {
                    return Err(Error::MissingExogenous);
                }
                xd_future.push(self.future_diffs(&col[cutoff - s..cutoff], &col[cutoff..cutoff + h])?);
            }
        }
        self.recurse(&pass.u[..j], &pass.e[..j], &y[cutoff - s..cutoff], &xd_future, h)
    }

    /// Convenience wrapper: residual pass over `history` then forecast from its end.
    pub fn forecast_from_history(
        &self,
        history: &[f64],
        exog: Option<&[Vec<f64>]>,
        h: usize,
    ) -> Result<Vec<f64>> {
        let n = history.len();
        let truncated: Option<Vec<Vec<f64>>> = exog.map(|cols| cols.iter().map(|c| c[..n].to_vec()).collect());
        let pass = self.residual_pass(history, truncated.as_deref())?;
        self.forecast_at(history, &pass, exog, n, h)
    }

    fn recurse(
        &self,
        u_hist: &[f64],
        e_hist: &[f64],
        y_tail: &[f64],
        xd_future: &[Vec<f64>],
        h: usize,
    ) -> Result<Vec<f64>> {
        debug_assert_eq!(u_hist.len(), e_hist.len());
        let lags = self.lags();
        let base = u_hist.len();
        let mut u: Vec<f64> = u_hist.to_vec();
        let mut diffs = Vec::with_capacity(h);
        for i in 0..h {
            let t = base + i;
            let mut v = self.coef.constant;
            for &(k, a) in &lags.ar {
                if t >= k {
                    v += a * u[t - k];
                }
            }
            for &(k, b) in &lags.ma {
                // future innovations are zero
                if t >= k && t - k < base {
                    v += b * e_hist[t - k];
                }
            }
            u.push(v);
            let reg: f64 = xd_future.iter().zip(&self.coef.beta).map(|(x, b)| b * x[i]).sum();
            diffs.push(v + reg);
        }
        undifference(&diffs, y_tail, self.order.d, self.order.seasonal_d, self.order.period)
    }
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
    fn stationarity_checks() {
        assert!(is_stationary(&[0.5]));
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[1.2]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_invertible(&[0.9]));
        assert!(!is_invertible(&[-1.1]));
    }

    #[test]
    fn seasonal_expansion_multiplies() {
        let ar = expand_ar(&[0.5], &[0.4], 4);
        // (1 - .5B)(1 - .4B^4) = 1 - .5B - .4B^4 + .2B^5
        assert_eq!(ar, vec![(1, 0.5), (4, 0.4), (5, -0.2)]);
        let ma = expand_ma(&[0.3], &[0.2], 2);
        // (1 + .3B)(1 + .2B^2) = 1 + .3B + .2B^2 + .06B^3
        assert_eq!(ma.len(), 3);
        assert!((ma[2].1 - 0.06).abs() < 1e-15);
    }

    #[test]
    fn white_noise_constant_is_mean() {
        let y: Vec<f64> = noise(300, 1).iter().map(|e| 3.0 + e).collect();
        let m = fit_arima(&y, ArimaOrder::new(0, 0, 0), None, &FitOptions::default()).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((m.coefficients().constant - mean).abs() < 1e-6);
    }

    #[test]
    fn ar1_forecast_decays_geometrically() {
        let coef = ArimaCoefficients {
            phi: vec![0.5],
            ..Default::default()
        };
        let m = ArimaModel::from_coefficients(ArimaOrder::new(1, 0, 0), coef, &[3.0, 1.0, 8.0], None).unwrap();
        assert_eq!(m.forecast(3, None).unwrap(), vec![4.0, 2.0, 1.0]);
    }

    #[test]
    fn constant_model_forecasts_constant() {
        let coef = ArimaCoefficients {
            constant: 2.5,
            ..Default::default()
        };
        let m = ArimaModel::from_coefficients(ArimaOrder::new(0, 0, 0), coef, &[1.0, 2.0], None).unwrap();
        assert_eq!(m.forecast(4, None).unwrap(), vec![2.5; 4]);
    }

    #[test]
    fn ma1_forecast_uses_last_residual() {
        // hand recursion: e_t = y_t - c - θ e_{t-1}, e_{-1} = 0
        let (c, theta) = (1.0, 0.4);
        let y = [2.0, 0.5, 1.5, 3.0, 1.0];
        let mut e_prev = 0.0;
        for &v in &y {
            e_prev = v - c - theta * e_prev;
        }
        let coef = ArimaCoefficients {
            theta: vec![theta],
            constant: c,
            ..Default::default()
        };
        let m = ArimaModel::from_coefficients(ArimaOrder::new(0, 0, 1), coef, &y, None).unwrap();
        let f = m.forecast(3, None).unwrap();
        assert!((f[0] - (c + theta * e_prev)).abs() < 1e-12);
        assert_eq!(&f[1..], &[c, c]);
    }

    #[test]
    fn duplicated_exog_is_singular() {
        let y = noise(200, 2);
        let x = noise(200, 3);
        let exog = vec![x.clone(), x];
        assert_eq!(
            fit_arima(&y, ArimaOrder::new(1, 0, 0), Some(&exog), &FitOptions::default()),
            Err(Error::SingularDesign)
        );
    }

    #[test]
    fn exog_coefficient_recovered() {
        let x = noise(400, 5);
        let e = noise(400, 6);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 2.0 + 1.5 * a + 0.1 * b).collect();
        let m = fit_arima(&y, ArimaOrder::new(0, 0, 0), Some(&[x]), &FitOptions::default()).unwrap();
        assert!((m.coefficients().beta[0] - 1.5).abs() < 0.02);
        assert!((m.coefficients().constant - 2.0).abs() < 0.02);
    }

    #[test]
    fn zero_beta_arimax_matches_arima() {
        let y: Vec<f64> = noise(120, 7).iter().scan(0.0, |s, e| {
            *s = 0.6 * *s + e;
            Some(*s)
        }).collect();
        let base = fit_arima(&y, ArimaOrder::new(1, 1, 1), None, &FitOptions { include_constant: false, ..Default::default() }).unwrap();
        let mut coef = base.coefficients().clone();
        coef.beta = vec![0.0, 0.0];
        let x = vec![noise(130, 8), noise(130, 9)];
        let with_x = ArimaModel::from_coefficients(base.order(), coef, &y, Some(&x)).unwrap();
        let fut: Vec<Vec<f64>> = x.iter().map(|c| c[120..].to_vec()).collect();
        assert_eq!(base.forecast(10, None).unwrap(), with_x.forecast(10, Some(&fut)).unwrap());
    }

    #[test]
    fn rolling_equals_truncated_history() {
        let y: Vec<f64> = noise(300, 10).iter().enumerate().map(|(t, e)| (t as f64 * 0.3).sin() * 3.0 + e).collect();
        let x = vec![noise(320, 11)];
        let model = fit_arima(&y[..200], ArimaOrder::new(1, 1, 1).seasonal(1, 0, 0, 7), Some(&x), &FitOptions { include_constant: false, ..Default::default() }).unwrap();
        let pass = model.residual_pass(&y, Some(&x)).unwrap();
        for cutoff in [200, 231, 299] {
            let a = model.forecast_at(&y, &pass, Some(&x), cutoff, 6).unwrap();
            let b = model.forecast_from_history(&y[..cutoff], Some(&x), 6).unwrap();
            assert_eq!(a, b);
        }
        // end of training equals the stored-state forecast
        let fut = vec![x[0][200..206].to_vec()];
        assert_eq!(
            model.forecast(6, Some(&fut)).unwrap(),
            model.forecast_at(&y, &pass, Some(&x), 200, 6).unwrap()
        );
    }

    #[test]
    fn missing_exog_is_reported() {
        let y = noise(100, 12);
        let x = vec![noise(100, 13)];
        let m = fit_arima(&y, ArimaOrder::new(1, 0, 0), Some(&x), &FitOptions::default()).unwrap();
        assert_eq!(m.forecast(3, None), Err(Error::MissingExogenous));
    }
}
