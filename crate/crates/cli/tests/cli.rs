use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use pvcomb::eval::Pair;
use pvcomb::series::{CleanPolicy, Resolution, TimeSeries};
use pvcomb_cli::ingest::{ingest_power, ingest_weather, read_power, write_power, write_weather};
use pvcomb_cli::{CliError, RunConfig};

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const WEATHER_HEADER: &str = "timestamp,wind_speed,temperature,dew_point,cloud_cover,uv_index,humidity,pressure";

#[test]
fn three_row_power_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.csv",
        "timestamp,power_kw\n2021-03-01T00:00:00Z,0.5\n2021-03-01T00:01:00Z,0.7\n2021-03-01T00:02:00Z,0.6\n",
    );
    let ts = ingest_power(&p, &CleanPolicy::default()).unwrap();
    assert_eq!(ts.len(), 3);
    assert_eq!(ts.resolution(), Resolution::MINUTE);
    assert_eq!(ts.values(), &[0.5, 0.7, 0.6]);
}

#[test]
fn out_of_order_rows_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.csv",
        "timestamp,power_kw\n2021-03-01T00:01:00Z,0.5\n2021-03-01T00:00:00Z,0.7\n",
    );
    let err = ingest_power(&p, &CleanPolicy::default()).unwrap_err();
    assert!(matches!(err, CliError::NonMonotonicTimestamps { line: 3, .. }), "{err}");
    assert_eq!(err.kind(), "NonMonotonicTimestamps");
}

#[test]
fn gap_is_materialised_and_interpolated() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.csv",
        "timestamp,power_kw\n2021-03-01T00:00:00Z,1.0\n2021-03-01T00:01:00Z,2.0\n2021-03-01T00:03:00Z,4.0\n",
    );
    let raw = read_power(&p).unwrap();
    assert_eq!(raw.len(), 4);
    assert_eq!(raw.missing_count(), 1);
    let ts = ingest_power(&p, &CleanPolicy::permissive()).unwrap();
    assert_eq!(ts.values(), &[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(ts.missing_count(), 0);
}

#[test]
fn missing_threshold_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.csv",
        "timestamp,power_kw\n2021-03-01T00:00:00Z,1.0\n2021-03-01T00:01:00Z,\n2021-03-01T00:02:00Z,4.0\n",
    );
    let err = ingest_power(&p, &CleanPolicy::default()).unwrap_err();
    assert_eq!(err.kind(), "MissingThresholdExceeded", "{err}");
}

#[test]
fn weather_file_has_seven_columns() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{WEATHER_HEADER}\n2021-03-01T00:00:00Z,1,2,3,4,5,6,7\n2021-03-01T01:00:00Z,1,2,3,4,,6,7\n2021-03-01T02:00:00Z,1,2,3,4,7,6,7\n"
    );
    let frame = ingest_weather(&write(dir.path(), "w.csv", &body)).unwrap();
    assert_eq!(frame.len(), 3);
    assert_eq!(frame.resolution(), Resolution::HOUR);
    assert_eq!(frame.row(0), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    assert_eq!(frame.column("uv_index").unwrap(), &[5.0, 6.0, 7.0]);
}

#[test]
fn missing_weather_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let header = WEATHER_HEADER.replace(",uv_index", "");
    let body = format!("{header}\n2021-03-01T00:00:00Z,1,2,3,4,6,7\n");
    let err = ingest_weather(&write(dir.path(), "w.csv", &body)).unwrap_err();
    assert_eq!(err.kind(), "SchemaError");
    assert!(err.to_string().contains("uv_index"), "{err}");
}

#[test]
fn weather_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{WEATHER_HEADER}\n2021-03-01T00:00:00Z,1.5,2,3,4,5,6,1013.25\n2021-03-01T01:00:00Z,0.1,2,3,4,5,6,7\n");
    let frame = ingest_weather(&write(dir.path(), "w.csv", &body)).unwrap();
    let out = dir.path().join("again.csv");
    write_weather(&out, &frame).unwrap();
    assert_eq!(ingest_weather(&out).unwrap(), frame);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_roundtrip(cells in prop::collection::vec(prop::option::weighted(0.9, -1e6f64..1e6), 1..200), offset in 0i64..100_000) {
        let dir = tempfile::tempdir().unwrap();
        let start = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap() + chrono::Duration::minutes(offset);
        // the first point anchors the grid, so it must be present
        let mut cells = cells;
        cells[0] = Some(cells[0].unwrap_or(0.0));
        let ts = TimeSeries::with_missing(start, Resolution::MINUTE, cells);
        let p = dir.path().join("p.csv");
        write_power(&p, &ts).unwrap();
        prop_assert_eq!(read_power(&p).unwrap(), ts);
    }
}

fn cohort(dir: &Path, houses: usize, seed: u64) -> RunConfig {
    let start = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
    let path = pvcomb_cli::synth::write_cohort(dir, houses, start, 122, seed).unwrap();
    let mut cfg = RunConfig::load(&path).unwrap();
    cfg.pairs = vec![Pair::HOUR_1D];
    cfg.seed = seed;
    let e = &mut cfg.eval;
    e.arima.search.max_p = 2;
    e.arima.search.max_q = 2;
    e.arima.search.max_models = 10;
    e.svr_trials = 2;
    e.pso_trials = 2;
    e.re_trials = 2;
    e.pso.swarm_size = 20;
    e.pso.neighbors = 20;
    e.pso.max_iterations = 50;
    cfg
}

#[test]
fn two_house_run_is_complete_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cohort(dir.path(), 2, 11);
    cfg.output_dir = dir.path().join("a");
    let report = pvcomb_cli::run(&cfg).unwrap();
    assert!(report.failures.is_empty());

    let summary = std::fs::read_to_string(cfg.output_dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("method,pair,median_mase,rank,final_rank"));
    assert_eq!(lines.count(), 10);
    assert!(!summary.contains('\r'));
    let per_house = std::fs::read_to_string(cfg.output_dir.join("per_house_mase.csv")).unwrap();
    assert_eq!(per_house.lines().count(), 1 + 2 * 10);
    let weights = std::fs::read_to_string(cfg.output_dir.join("weights.csv")).unwrap();
    assert_eq!(weights.lines().next(), Some("house_id,pair,strategy,w_1,w_2,w_3,w_4,w_5"));
    for house in cfg.houses.keys() {
        assert!(cfg.output_dir.join("samples").join(house).join("1h-1d.csv").is_file());
    }

    let first = cfg.output_dir.clone();
    cfg.output_dir = dir.path().join("b");
    pvcomb_cli::run(&cfg).unwrap();
    for f in ["per_house_mase.csv", "summary.csv", "significance.csv", "weights.csv"] {
        assert_eq!(
            std::fs::read(first.join(f)).unwrap(),
            std::fs::read(cfg.output_dir.join(f)).unwrap(),
            "{f}"
        );
    }

    // the cache reproduces the tables
    let summary_before = std::fs::read(first.join("summary.csv")).unwrap();
    std::fs::remove_file(first.join("summary.csv")).unwrap();
    pvcomb_cli::report(&first).unwrap();
    assert_eq!(std::fs::read(first.join("summary.csv")).unwrap(), summary_before);

    let charts = pvcomb_cli::plot::plot(&first).unwrap();
    assert!(!charts.is_empty());
    for c in charts {
        assert!(std::fs::read_to_string(c).unwrap().starts_with("<svg"));
    }
}

#[test]
fn empty_cohort_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = cohort(dir.path(), 1, 1);
    cfg.houses.clear();
    let err = pvcomb_cli::run(&cfg).unwrap_err();
    assert_eq!(err.kind(), "EmptyCohort");
}

#[test]
fn binary_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "config.json",
        r#"{"power_dir": ".", "houses": {}, "weather": {}}"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_pvcomb"))
        .arg("--config")
        .arg(&cfg)
        .arg("run")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["error"], "EmptyCohort");
    assert!(v["message"].is_string());
}

#[test]
fn binary_rejects_bad_pairs() {
    let out = Command::new(env!("CARGO_BIN_EXE_pvcomb"))
        .args(["--pairs", "1h-90min", "run"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
