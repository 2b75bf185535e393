//! Evaluates one synthetic house at every resolution/horizon pair and prints
//! per-method mean MASE with wall-clock timings.

use std::time::Instant;

use chrono::{TimeZone, Utc};
use pvcomb::eval::{evaluate_house, prepare_house, EvalConfig, Method, Pair};
use pvcomb::stat::SearchConfig;
use pvcomb::swarm::PsoParams;
use pvcomb::synthetic::synthetic_cohort;

fn main() -> pvcomb::Result<()> {
    env_logger::init();
    let start = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
    let cohort = synthetic_cohort(1, start, 122, 2026)?;
    let house = &cohort.houses[0];
    let weather = cohort.weather_for(&house.location).expect("location weather");
    let mut cfg = EvalConfig {
        svr_trials: 2,
        pso_trials: 2,
        re_trials: 2,
        pso: PsoParams {
            swarm_size: 20,
            neighbors: 20,
            max_iterations: 50,
            ..PsoParams::default()
        },
        ..EvalConfig::default()
    };
    cfg.arima.search = SearchConfig {
        max_p: 2,
        max_q: 2,
        max_models: 10,
        max_evals: 300,
        ..SearchConfig::default()
    };
    for pair in Pair::DEFAULTS {
        let t = Instant::now();
        let data = prepare_house(&house.id, &house.power, weather, pair)?;
        let r = evaluate_house(&data, pair, &cfg)?;
        println!(
            "{pair}: {:.1}s  k={} orders {} / {}",
            t.elapsed().as_secs_f64(),
            r.test_samples(),
            r.tuned.sarima_order,
            r.tuned.sarimax_order
        );
        for m in Method::ALL {
            println!("  {:<18} {:.4}", m.label(), r.mean(m));
        }
    }
    Ok(())
}
