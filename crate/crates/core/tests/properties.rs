use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use pvcomb::combine::{fit_weights_pso, CombinationProblem, ForecastMatrix, Strategy};
use pvcomb::eval::{evaluate_house, prepare_house, rank_values, EvalConfig, Method, Pair};
use pvcomb::ml::{fit_mlr, fit_svr, DesignMatrix, SvrParams};
use pvcomb::series::seasonal_period;
use pvcomb::stat::{fit_arima, ArimaCoefficients, ArimaModel, ArimaOrder, FitOptions};
use pvcomb::swarm::{PsoParams, Swarm};
use pvcomb::synthetic::synthetic_cohort;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn arma11(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let (mut prev_y, mut prev_e) = (0.0, 0.0);
    (0..n + 100)
        .map(|_| {
            let e = z.sample(&mut rng);
            let y = 0.6 * prev_y + e + 0.3 * prev_e;
            (prev_y, prev_e) = (y, e);
            y
        })
        .skip(100)
        .collect()
}

#[test]
fn css_fit_beats_every_nearby_grid_point() {
    let y = arma11(400, 21);
    let order = ArimaOrder::new(1, 0, 1);
    let opts = FitOptions {
        include_constant: false,
        ..FitOptions::default()
    };
    let fit = fit_arima(&y, order, None, &opts).unwrap();
    let c = fit.coefficients().clone();
    let css_at = |phi: f64, theta: f64| {
        let coef = ArimaCoefficients {
            phi: vec![phi],
            theta: vec![theta],
            ..ArimaCoefficients::default()
        };
        ArimaModel::from_coefficients(order, coef, &y, None).unwrap().css()
    };
    let at_fit = css_at(c.phi[0], c.theta[0]);
    assert!((at_fit - fit.css()).abs() <= 1e-9 * fit.css());
    for i in -5..5 {
        for j in -5..5 {
            let (phi, theta) = (c.phi[0] + 0.01 * i as f64, c.theta[0] + 0.01 * j as f64);
            assert!(
                css_at(phi, theta) >= fit.css() * (1.0 - 1e-9),
                "({phi}, {theta}) beats the fit"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regressors_ignore_affine_feature_rescaling(
        seed in 0u64..1000,
        scale in prop::array::uniform3(0.1f64..50.0),
        shift in prop::array::uniform3(-100.0f64..100.0),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 + r[0] - 0.5 * r[1] * r[2] + rng.random_range(-0.2..0.2)).collect();
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| v * scale[j] + shift[j]).collect())
            .collect();
        let a = DesignMatrix::new(rows.clone(), y.clone()).unwrap();
        let b = DesignMatrix::new(moved.clone(), y.clone()).unwrap();

        // solved tightly so both fits land on the same optimum
        let params = SvrParams { tol: 1e-10, ..SvrParams::new(0.5, 0.1, 2.0) };
        let fa = fit_svr(&a, &params).unwrap().decision_function(&rows).unwrap();
        let fb = fit_svr(&b, &params).unwrap().decision_function(&moved).unwrap();
        for (u, v) in fa.iter().zip(&fb) {
            prop_assert!((u - v).abs() <= 1e-6, "svr {u} vs {v}");
        }

        let ma = fit_mlr(&a).unwrap().predict(&rows).unwrap();
        let mb = fit_mlr(&b).unwrap().predict(&moved).unwrap();
        for (u, v) in ma.iter().zip(&mb) {
            prop_assert!((u - v).abs() <= 1e-6, "mlr {u} vs {v}");
        }
    }

    #[test]
    fn global_best_never_worsens(seed in 0u64..1000, neighbors in 1usize..=12) {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2) + (3.0 * v).sin()).sum::<f64>();
        let params = PsoParams {
            swarm_size: 12,
            neighbors,
            max_iterations: 40,
            seed,
            ..PsoParams::default()
        };
        let mut swarm = Swarm::new(&f, 3, params).unwrap();
        let mut best = swarm.best_value();
        for _ in 0..40 {
            swarm.step(&f);
            prop_assert!(swarm.best_value() <= best);
            best = swarm.best_value();
        }
    }

    #[test]
    fn strictly_smallest_median_ranks_first(values in prop::collection::vec(0.0f64..5.0, 2..12), pick in 0usize..12) {
        let mut values = values;
        let i = pick % values.len();
        values[i] = values.iter().cloned().fold(f64::INFINITY, f64::min) - 0.1;
        let ranks = rank_values(&values);
        prop_assert_eq!(ranks[i], 1.0);
        prop_assert!(ranks.iter().enumerate().all(|(j, r)| j == i || *r > 1.0));
    }
}

#[test]
fn convex_weights_beat_every_one_hot() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let insample: Vec<f64> = (0..50).map(|t| (t as f64 / 3.0).sin() + 2.0).collect();
    let mut samples = Vec::new();
    let mut actuals = Vec::new();
    for _ in 0..6 {
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(1.0..3.0)).collect();
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|j| a.iter().map(|v| v + rng.random_range(-0.5..0.5) * (j + 1) as f64).collect())
            .collect();
        samples.push(ForecastMatrix::from_columns(&cols).unwrap());
        actuals.push(a);
    }
    let problem = CombinationProblem::new(samples, actuals, &insample, 1).unwrap();
    for seed in [1, 2, 3] {
        let params = PsoParams {
            swarm_size: 30,
            neighbors: 30,
            max_iterations: 200,
            seed,
            ..PsoParams::default()
        };
        for strategy in [Strategy::Box01, Strategy::Convex] {
            let w = fit_weights_pso(&problem, strategy, &params).unwrap();
            let obj = problem.objective(w.weights());
            for j in 0..4 {
                let hot: Vec<f64> = (0..4).map(|i| f64::from(u8::from(i == j))).collect();
                assert!(obj <= problem.objective(&hot) + 1e-6, "{strategy} seed {seed} vs e_{j}");
            }
        }
    }
}

fn light_config() -> EvalConfig {
    let mut cfg = EvalConfig::default();
    cfg.arima.search.max_p = 2;
    cfg.arima.search.max_q = 2;
    cfg.arima.search.max_models = 8;
    cfg.svr_trials = 2;
    cfg.pso_trials = 2;
    cfg.re_trials = 2;
    cfg.pso.swarm_size = 15;
    cfg.pso.neighbors = 15;
    cfg.pso.max_iterations = 30;
    cfg.leakage_checks = usize::MAX;
    cfg.seed = 4;
    cfg
}

#[test]
fn sample_scores_replay_from_dumped_forecasts() {
    let start = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
    let cohort = synthetic_cohort(1, start, 122, 8).unwrap();
    let house = &cohort.houses[0];
    let weather = cohort.weather_for(&house.location).unwrap();
    let pair = Pair::DAY_3D;
    let data = prepare_house(&house.id, &house.power, weather, pair).unwrap();
    let result = evaluate_house(&data, pair, &light_config()).unwrap();

    let y = data.power.values();
    let m = seasonal_period(pair.resolution).unwrap();
    let insample = &y[result.split.insample()];
    let scale = (m..insample.len()).map(|t| (insample[t] - insample[t - m]).abs()).sum::<f64>()
        / (insample.len() - m) as f64;
    assert!((scale - result.test_scale).abs() <= 1e-12 * scale);

    assert!(!result.samples.is_empty());
    assert_eq!(result.leakage_checked, result.holdout_samples + result.samples.len());
    for s in &result.samples {
        assert!(s.cutoff >= result.split.test.start);
        assert_eq!(&y[s.cutoff..s.cutoff + pair.steps], s.actuals.as_slice());
        for (j, f) in s.forecasts.iter().enumerate() {
            let mae = f.iter().zip(&s.actuals).map(|(a, b)| (a - b).abs()).sum::<f64>() / pair.steps as f64;
            let replay = mae / scale;
            assert!(
                (replay - s.mase[j]).abs() <= 1e-12 * replay.max(1.0),
                "{} at cutoff {}: {} vs {}",
                Method::ALL[j],
                s.cutoff,
                replay,
                s.mase[j]
            );
        }
    }
    for method in Method::ALL {
        let mean = result.samples.iter().map(|s| s.mase[method.index()]).sum::<f64>() / result.samples.len() as f64;
        assert!((mean - result.mean(method)).abs() <= 1e-12 * mean.max(1.0));
    }
}
