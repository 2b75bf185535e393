//! Derivative-free Nelder–Mead minimiser used for conditional-sum-of-squares fits.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Relative spread of simplex values at which the search stops.
    pub ftol: f64,
    pub max_evals: usize,
    /// Initial simplex edge length along each axis.
    pub step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            ftol: 1e-8,
            max_evals: 2000,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimises `f` starting from `x0`. Non-finite values are treated as `+inf`,
/// so infeasible regions can be signalled by returning `f64::INFINITY`.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let value = eval(x0, &mut evals);
        return Minimum {
            x: Vec::new(),
            value,
            evals,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut converged = false;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let (best, worst) = (values[0], values[n]);
        if best.is_finite()
            && worst.is_finite()
            && 2.0 * (worst - best).abs() <= opts.ftol * (worst.abs() + best.abs() + 1e-20)
        {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&shrunk, &mut evals);
            simplex[i] = shrunk;
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            ftol: 1e-14,
            max_evals: 5000,
            step: 0.5,
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{:?}", m);
    }

    #[test]
    fn respects_infeasible_region() {
        let f = |x: &[f64]| {
            if x[0] < 0.5 {
                f64::INFINITY
            } else {
                (x[0] - 0.2).powi(2)
            }
        };
        let m = nelder_mead(f, &[1.0], &NelderMeadOptions::default());
        assert!(m.x[0] >= 0.5 && m.x[0] < 0.51, "{:?}", m);
    }
}
