//! Report files. Numbers carry six decimals, rows come in a fixed order and
//! lines end in LF so reruns can be compared byte for byte.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use pvcomb::combine::Strategy;
use pvcomb::eval::{EvaluationReport, HouseFailure, HouseResult, Method};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const PER_HOUSE: &str = "per_house_mase.csv";
pub const SUMMARY: &str = "summary.csv";
pub const SIGNIFICANCE: &str = "significance.csv";
pub const WEIGHTS: &str = "weights.csv";
pub const FAILURES: &str = "failures.csv";
pub const SAMPLES_DIR: &str = "samples";
pub const CACHE: &str = "results.json";

/// Number of base forecasters combined by the weight strategies.
const BASE: usize = 5;

pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let file = File::create(path).map_err(CliError::io(path))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// Results sorted by pair then house id.
fn ordered(results: &[HouseResult]) -> Vec<&HouseResult> {
    let mut v: Vec<&HouseResult> = results.iter().collect();
    v.sort_by(|a, b| (a.pair, &a.house_id).cmp(&(b.pair, &b.house_id)));
    v
}

pub fn write_per_house(path: &Path, results: &[HouseResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["house_id", "method", "pair", "mean_mase", "k"])?;
    for r in ordered(results) {
        let pair = r.pair.to_string();
        let k = r.test_samples().to_string();
        for m in Method::ALL {
            w.write_record([r.house_id.as_str(), m.label(), &pair, &fmt6(r.mean(m)), &k])?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_summary(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["method", "pair", "median_mase", "rank", "final_rank"])?;
    for p in &report.pairs {
        let pair = p.pair.to_string();
        for m in Method::ALL {
            let i = m.index();
            w.write_record([
                m.label(),
                &pair,
                &fmt6(p.median[i]),
                &fmt6(p.rank[i]),
                &fmt6(report.final_rank[i]),
            ])?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_significance(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["method", "pair", "U", "p", "significant"])?;
    for s in &report.significance {
        w.write_record([
            s.method.label(),
            &s.pair.to_string(),
            &fmt6(s.u),
            &fmt6(s.p),
            if s.significant { "true" } else { "false" },
        ])?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_weights(path: &Path, results: &[HouseResult]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["house_id".to_string(), "pair".into(), "strategy".into()];
    header.extend((1..=BASE).map(|i| format!("w_{i}")));
    w.write_record(&header)?;
    for r in ordered(results) {
        let pair = r.pair.to_string();
        for s in Strategy::ALL {
            let mut row = vec![r.house_id.clone(), pair.clone(), s.as_str().to_string()];
            row.extend(r.weights_for(s).weights().iter().map(|&x| fmt6(x)));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_failures(path: &Path, failures: &[HouseFailure]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["house_id", "pair", "error"])?;
    for f in failures {
        w.write_record([f.house_id.as_str(), &f.pair.to_string(), &f.error])?;
    }
    w.flush().map_err(CliError::io(path))
}

/// One row per sample and step: actual value, each method's forecast and
/// each method's sample MASE.
pub fn write_samples(path: &Path, result: &HouseResult) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["sample".to_string(), "cutoff".into(), "step".into(), "actual".into()];
    header.extend(Method::ALL.iter().map(|m| m.label().to_string()));
    header.extend(Method::ALL.iter().map(|m| format!("mase_{}", m.label())));
    w.write_record(&header)?;
    for (i, s) in result.samples.iter().enumerate() {
        for (step, actual) in s.actuals.iter().enumerate() {
            let mut row = vec![i.to_string(), s.cutoff.to_string(), (step + 1).to_string(), fmt6(*actual)];
            row.extend(s.forecasts.iter().map(|f| fmt6(f[step])));
            row.extend(s.mase.iter().map(|&x| fmt6(x)));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

/// Per-house results kept for re-aggregation. Sample-level forecasts live in
/// the samples directory and are left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCache {
    pub locations: BTreeMap<String, String>,
    pub results: Vec<HouseResult>,
    pub failures: Vec<HouseFailure>,
}

impl RunCache {
    pub fn new(locations: BTreeMap<String, String>, results: &[HouseResult], failures: Vec<HouseFailure>) -> Self {
        let results = ordered(results)
            .into_iter()
            .map(|r| HouseResult {
                samples: Vec::new(),
                ..r.clone()
            })
            .collect();
        RunCache {
            locations,
            results,
            failures,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(CliError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Writes the aggregate tables (everything except per-sample files).
pub fn write_tables(dir: &Path, results: &[HouseResult], report: &EvaluationReport) -> Result<()> {
    write_per_house(&dir.join(PER_HOUSE), results)?;
    write_summary(&dir.join(SUMMARY), report)?;
    write_significance(&dir.join(SIGNIFICANCE), report)?;
    write_weights(&dir.join(WEIGHTS), results)?;
    write_failures(&dir.join(FAILURES), &report.failures)
}

pub fn samples_path(dir: &Path, result: &HouseResult) -> std::path::PathBuf {
    dir.join(SAMPLES_DIR)
        .join(&result.house_id)
        .join(format!("{}.csv", result.pair))
}
