//! Writes a synthetic cohort as CSV inputs plus a config that points at them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use pvcomb::synthetic::synthetic_cohort;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ingest::{write_power, write_weather};

/// Generates `houses` houses over `days` days into `dir` and returns the
/// path of the written `config.json`. The config uses relative paths.
pub fn write_cohort(dir: &Path, houses: usize, start: DateTime<Utc>, days: usize, seed: u64) -> Result<PathBuf> {
    let cohort = synthetic_cohort(houses, start, days, seed)?;
    let mut cfg = RunConfig {
        power_dir: PathBuf::from("power"),
        output_dir: PathBuf::from("out"),
        ..RunConfig::default()
    };
    let mut weather = BTreeMap::new();
    for (loc, frame) in &cohort.weather {
        let rel = PathBuf::from("weather").join(format!("{loc}.csv"));
        write_weather(&dir.join(&rel), frame)?;
        weather.insert(loc.clone(), rel);
    }
    for h in &cohort.houses {
        write_power(&dir.join("power").join(format!("{}.csv", h.id)), &h.power)?;
        cfg.houses.insert(h.id.clone(), h.location.clone());
    }
    cfg.weather = weather;
    let path = dir.join("config.json");
    let text = serde_json::to_string_pretty(&cfg)?;
    std::fs::write(&path, text + "\n").map_err(CliError::io(&path))?;
    Ok(path)
}
