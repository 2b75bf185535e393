//! Train/holdout/test evaluation of base forecasters and their
//! combinations across a cohort of houses.

mod pipeline;
mod report;
mod splits;
mod stats;

pub use pipeline::{
    evaluate_house, prepare_house, EvalConfig, HouseData, HouseResult, SampleRecord, TunedParams,
};
pub use report::{aggregate_report, final_ranks, EvaluationReport, HouseFailure, PairSummary, Significance};
pub use splits::{extract_samples, make_splits, Sample, SplitPlan};
pub use stats::{mann_whitney_u, mann_whitney_u_exact, rank_methods, rank_values, MannWhitney};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combine::Strategy;
use crate::error::{Error, Result};
use crate::series::Resolution;

/// Every reported method, base forecasters first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SeasonalNaive,
    Sarima,
    Sarimax,
    Mlr,
    Svr,
    PsoUnconstrained,
    PsoBox01,
    PsoConvex,
    Average,
    RecursiveEnsemble,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::SeasonalNaive,
        Method::Sarima,
        Method::Sarimax,
        Method::Mlr,
        Method::Svr,
        Method::PsoUnconstrained,
        Method::PsoBox01,
        Method::PsoConvex,
        Method::Average,
        Method::RecursiveEnsemble,
    ];

    /// The five base forecasters in forecast-matrix column order.
    pub const BASE: [Method; 5] = [
        Method::SeasonalNaive,
        Method::Sarima,
        Method::Sarimax,
        Method::Mlr,
        Method::Svr,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::SeasonalNaive => "sn",
            Method::Sarima => "sarima",
            Method::Sarimax => "sarimax",
            Method::Mlr => "mlr",
            Method::Svr => "svr",
            Method::PsoUnconstrained => "pso_unconstrained",
            Method::PsoBox01 => "pso_box01",
            Method::PsoConvex => "pso_convex",
            Method::Average => "average",
            Method::RecursiveEnsemble => "re",
        }
    }

    pub fn index(self) -> usize {
        Method::ALL.iter().position(|&m| m == self).expect("listed")
    }

    pub fn strategy(self) -> Option<Strategy> {
        match self {
            Method::PsoUnconstrained => Some(Strategy::Unconstrained),
            Method::PsoBox01 => Some(Strategy::Box01),
            Method::PsoConvex => Some(Strategy::Convex),
            Method::Average => Some(Strategy::Average),
            Method::RecursiveEnsemble => Some(Strategy::Recursive),
            _ => None,
        }
    }

    pub fn from_strategy(s: Strategy) -> Method {
        match s {
            Strategy::Unconstrained => Method::PsoUnconstrained,
            Strategy::Box01 => Method::PsoBox01,
            Strategy::Convex => Method::PsoConvex,
            Strategy::Average => Method::Average,
            Strategy::Recursive => Method::RecursiveEnsemble,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// A data resolution with a forecast horizon expressed in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pair {
    pub resolution: Resolution,
    pub steps: usize,
}

impl Pair {
    pub const DAY_3D: Pair = Pair {
        resolution: Resolution::DAY,
        steps: 3,
    };
    pub const HOUR_1D: Pair = Pair {
        resolution: Resolution::HOUR,
        steps: 24,
    };
    pub const FIVE_MIN_1H: Pair = Pair {
        resolution: Resolution::FIVE_MINUTES,
        steps: 12,
    };
    pub const MINUTE_5MIN: Pair = Pair {
        resolution: Resolution::MINUTE,
        steps: 5,
    };

    pub const DEFAULTS: [Pair; 4] = [Pair::DAY_3D, Pair::HOUR_1D, Pair::FIVE_MIN_1H, Pair::MINUTE_5MIN];

    pub fn new(resolution: Resolution, horizon_secs: i64) -> Result<Pair> {
        let step = resolution.step_secs();
        if horizon_secs <= 0 || horizon_secs % step != 0 {
            return Err(Error::NonIntegerFactor {
                from: step,
                to: horizon_secs,
            });
        }
        Ok(Pair {
            resolution,
            steps: (horizon_secs / step) as usize,
        })
    }

    pub fn horizon_secs(self) -> i64 {
        self.resolution.step_secs() * self.steps as i64
    }
}

impl fmt::Display for Pair {
    /// `<resolution>-<horizon>`, e.g. `1h-1d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let horizon = Resolution::from_secs(self.horizon_secs()).map_err(|_| fmt::Error)?;
        write!(f, "{}-{}", self.resolution, horizon)
    }
}

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (res, hor) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidParameter(format!("pair {s:?} is not <resolution>-<horizon>")))?;
        Pair::new(res.parse()?, hor.parse::<Resolution>()?.step_secs())
    }
}

impl TryFrom<String> for Pair {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Pair> for String {
    fn from(p: Pair) -> String {
        p.to_string()
    }
}
