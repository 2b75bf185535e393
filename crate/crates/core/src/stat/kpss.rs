//! Unit-root and seasonality diagnostics used to pick differencing orders.

/// KPSS level-stationarity statistic with a Bartlett long-run variance and
/// `trunc(3 sqrt(n) / 13)` lags.
pub fn kpss_level(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 3 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let e: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let mut s = 0.0;
    let mut eta = 0.0;
    for v in &e {
        s += v;
        eta += s * s;
    }
    eta /= (n * n) as f64;
    let lags = ((3.0 * (n as f64).sqrt() / 13.0) as usize).min(n - 1);
    let mut lrv = e.iter().map(|v| v * v).sum::<f64>() / n as f64;
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        let gamma: f64 = e[l..].iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        lrv += 2.0 * w * gamma;
    }
    if lrv <= 0.0 {
        return 0.0;
    }
    eta / lrv
}

/// Strength of seasonality `max(0, 1 - Var(R) / Var(S + R))` from a classical
/// moving-average decomposition with period `m`.
pub fn seasonal_strength(x: &[f64], m: usize) -> f64 {
    let n = x.len();
    if m < 2 || n < 2 * m + 1 {
        return 0.0;
    }
    // centred moving average; 2xm for even periods
    let half = m / 2;
    let mut trend = vec![f64::NAN; n];
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(x.iter().scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        }))
        .collect();
    let window_sum = |a: usize, b: usize| prefix[b] - prefix[a];
    for (t, tr) in trend.iter_mut().enumerate().take(n - half).skip(half) {
        *tr = if m % 2 == 1 {
            window_sum(t - half, t + half + 1) / m as f64
        } else {
            let inner = window_sum(t + 1 - half, t + half);
            (inner + 0.5 * x[t - half] + 0.5 * x[t + half]) / m as f64
        };
    }
    let detr: Vec<f64> = x.iter().zip(&trend).map(|(v, t)| v - t).collect();
    let mut phase_sum = vec![0.0; m];
    let mut phase_cnt = vec![0usize; m];
    for (t, v) in detr.iter().enumerate() {
        if v.is_finite() {
            phase_sum[t % m] += v;
            phase_cnt[t % m] += 1;
        }
    }
    let mut seasonal: Vec<f64> = phase_sum
        .iter()
        .zip(&phase_cnt)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let smean = seasonal.iter().sum::<f64>() / m as f64;
    for s in &mut seasonal {
        *s -= smean;
    }
    let mut sr = Vec::new();
    let mut r = Vec::new();
    for (t, v) in detr.iter().enumerate() {
        if v.is_finite() {
            sr.push(*v);
            r.push(v - seasonal[t % m]);
        }
    }
    let var = |v: &[f64]| {
        let mu = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / v.len() as f64
    };
    let vsr = var(&sr);
    if vsr <= 0.0 {
        return 0.0;
    }
    (1.0 - var(&r) / vsr).max(0.0)
}
