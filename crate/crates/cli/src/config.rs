use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pvcomb::eval::{EvalConfig, Pair};
use pvcomb::series::CleanPolicy;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Everything a run needs. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory with one `<house_id>.csv` power file per house.
    pub power_dir: PathBuf,
    /// Hourly weather file per location.
    pub weather: BTreeMap<String, PathBuf>,
    /// House id to location.
    pub houses: BTreeMap<String, String>,
    pub pairs: Vec<Pair>,
    pub eval: EvalConfig,
    pub clean: CleanPolicy,
    pub seed: u64,
    /// Worker threads; defaults to the rayon default.
    pub jobs: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            power_dir: PathBuf::from("power"),
            weather: BTreeMap::new(),
            houses: BTreeMap::new(),
            pairs: Pair::DEFAULTS.to_vec(),
            eval: EvalConfig::default(),
            clean: CleanPolicy::default(),
            seed: 0,
            jobs: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Reads, resolves and validates a JSON config.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.power_dir = resolve(base, &cfg.power_dir);
        cfg.output_dir = resolve(base, &cfg.output_dir);
        for p in cfg.weather.values_mut() {
            *p = resolve(base, p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn power_path(&self, house: &str) -> PathBuf {
        self.power_dir.join(format!("{house}.csv"))
    }

    /// Checks that every referenced file exists and every house has weather.
    pub fn validate(&self) -> Result<()> {
        if !self.power_dir.is_dir() {
            return Err(CliError::Config(format!("power_dir {} is not a directory", self.power_dir.display())));
        }
        for (loc, p) in &self.weather {
            if !p.is_file() {
                return Err(CliError::Config(format!("weather file for {loc} not found: {}", p.display())));
            }
        }
        for (house, loc) in &self.houses {
            if !self.weather.contains_key(loc) {
                return Err(CliError::Config(format!("house {house} refers to unknown location {loc}")));
            }
            let p = self.power_path(house);
            if !p.is_file() {
                return Err(CliError::Config(format!("power file for {house} not found: {}", p.display())));
            }
        }
        if self.pairs.is_empty() {
            return Err(CliError::Config("no resolution/horizon pairs enabled".into()));
        }
        Ok(())
    }

    /// Keeps only the listed houses.
    pub fn select_houses(&mut self, ids: &[String]) -> Result<()> {
        for id in ids {
            if !self.houses.contains_key(id) {
                return Err(CliError::Config(format!("unknown house {id}")));
            }
        }
        self.houses.retain(|h, _| ids.contains(h));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"power_dir": "p", "seed": 4}"#).unwrap();
        assert_eq!(cfg.pairs, Pair::DEFAULTS.to_vec());
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.eval.re_max_iterations, 50);
        let pairs: RunConfig = serde_json::from_str(r#"{"pairs": ["1h-1d"]}"#).unwrap();
        assert_eq!(pairs.pairs, vec![Pair::HOUR_1D]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"pairs": ["1h-90min"]}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
