//! Orchestration of the `ingest`, `run` and `report` subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use pvcomb::eval::{aggregate_report, evaluate_house, prepare_house, EvaluationReport, HouseFailure, HouseResult, Pair};
use pvcomb::series::{TimeSeries, WeatherFrame};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ingest::{ingest_power, ingest_weather, write_power, write_weather};
use crate::output::{self, RunCache};

/// Parsed inputs for every selected house.
pub struct Inputs {
    pub power: BTreeMap<String, TimeSeries>,
    pub weather: BTreeMap<String, WeatherFrame>,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    if cfg.houses.is_empty() {
        return Err(CliError::EmptyCohort);
    }
    let mut weather = BTreeMap::new();
    for loc in cfg.houses.values() {
        if !weather.contains_key(loc) {
            weather.insert(loc.clone(), ingest_weather(&cfg.weather[loc])?);
        }
    }
    let mut power = BTreeMap::new();
    for house in cfg.houses.keys() {
        power.insert(house.clone(), ingest_power(&cfg.power_path(house), &cfg.clean)?);
    }
    Ok(Inputs { power, weather })
}

/// Validates every input and writes cleaned copies under `out/normalized`.
pub fn ingest(cfg: &RunConfig) -> Result<PathBuf> {
    let inputs = load_inputs(cfg)?;
    let dir = cfg.output_dir.join("normalized");
    for (house, ts) in &inputs.power {
        info!("{house}: {} minutes from {}", ts.len(), ts.start());
        write_power(&dir.join("power").join(format!("{house}.csv")), ts)?;
    }
    for (loc, frame) in &inputs.weather {
        info!("{loc}: {} hours of weather", frame.len());
        write_weather(&dir.join("weather").join(format!("{loc}.csv")), frame)?;
    }
    Ok(dir)
}

fn evaluate_job(cfg: &RunConfig, inputs: &Inputs, house: &str, pair: Pair) -> pvcomb::Result<HouseResult> {
    let loc = &cfg.houses[house];
    let data = prepare_house(house, &inputs.power[house], &inputs.weather[loc], pair)?;
    let mut eval = cfg.eval.clone();
    eval.seed = cfg.seed;
    evaluate_house(&data, pair, &eval)
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(f())
}

/// Evaluates every house and pair, writes all outputs and returns the report.
/// Houses that fail are logged and listed in `failures.csv`.
pub fn run(cfg: &RunConfig) -> Result<EvaluationReport> {
    let inputs = load_inputs(cfg)?;
    let jobs: Vec<(String, Pair)> = cfg
        .pairs
        .iter()
        .flat_map(|&p| cfg.houses.keys().map(move |h| (h.clone(), p)))
        .collect();
    info!("{} house-pair jobs", jobs.len());
    let outcomes = with_pool(cfg.jobs, || {
        pvcomb::par::map(&jobs, |(house, pair)| {
            let started = std::time::Instant::now();
            let r = evaluate_job(cfg, &inputs, house, *pair);
            info!("{house} {pair} done in {:.1}s", started.elapsed().as_secs_f64());
            r
        })
    })?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for ((house, pair), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                warn!("{house} {pair}: {e}");
                failures.push(HouseFailure {
                    house_id: house.clone(),
                    pair: *pair,
                    error: e.to_string(),
                });
            }
        }
    }
    if results.is_empty() {
        return Err(CliError::NoResults);
    }
    let mut report = aggregate_report(&results, &cfg.houses)?;
    report.failures = failures.clone();

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    output::write_tables(dir, &results, &report)?;
    for r in &results {
        output::write_samples(&output::samples_path(dir, r), r)?;
    }
    RunCache::new(cfg.houses.clone(), &results, failures).save(&dir.join(output::CACHE))?;
    Ok(report)
}

/// Re-aggregates the cached results in `dir` and rewrites the tables.
pub fn report(dir: &Path) -> Result<EvaluationReport> {
    let cache = RunCache::load(&dir.join(output::CACHE))?;
    if cache.results.is_empty() {
        return Err(CliError::NoResults);
    }
    let mut report = aggregate_report(&cache.results, &cache.locations)?;
    report.failures = cache.failures.clone();
    output::write_tables(dir, &cache.results, &report)?;
    Ok(report)
}
