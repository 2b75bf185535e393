use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::pipeline::HouseResult;
use super::stats::{mann_whitney_u, rank_values};
use super::{Method, Pair};
use crate::error::{Error, Result};
use crate::metrics::median;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseFailure {
    pub house_id: String,
    pub pair: Pair,
    pub error: String,
}

/// Cross-house summary for one pair, indexed like [`Method::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: Pair,
    pub houses: usize,
    pub median: Vec<f64>,
    pub rank: Vec<f64>,
}

/// Location comparison of one method's per-house means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub method: Method,
    pub pair: Pair,
    pub group_a: String,
    pub group_b: String,
    pub ids_a: Vec<String>,
    pub ids_b: Vec<String>,
    pub u: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub pairs: Vec<PairSummary>,
    /// Rank of each method's mean per-pair rank.
    pub final_rank: Vec<f64>,
    pub significance: Vec<Significance>,
    pub failures: Vec<HouseFailure>,
}

/// Final ranking across pairs: the fractional rank of each method's mean
/// per-pair rank.
pub fn final_ranks(per_pair: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = per_pair.first() else {
        return Vec::new();
    };
    let means: Vec<f64> = (0..first.len())
        .map(|j| per_pair.iter().map(|r| r[j]).sum::<f64>() / per_pair.len() as f64)
        .collect();
    rank_values(&means)
}

/// Medians, ranks and, when houses fall in exactly two locations, a
/// Mann–Whitney comparison per method and pair. Houses missing from
/// `locations` are left out of the comparison.
pub fn aggregate_report(results: &[HouseResult], locations: &BTreeMap<String, String>) -> Result<EvaluationReport> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut by_pair: BTreeMap<Pair, Vec<&HouseResult>> = BTreeMap::new();
    for r in results {
        by_pair.entry(r.pair).or_default().push(r);
    }
    let mut groups: Vec<&String> = locations.values().collect();
    groups.sort();
    groups.dedup();

    let mut pairs = Vec::new();
    let mut significance = Vec::new();
    for (pair, houses) in &by_pair {
        let median_by_method = Method::ALL
            .iter()
            .map(|&m| median(&houses.iter().map(|h| h.mean(m)).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        let rank = rank_values(&median_by_method);
        pairs.push(PairSummary {
            pair: *pair,
            houses: houses.len(),
            median: median_by_method,
            rank,
        });
        if let [a, b] = groups[..] {
            let members = |loc: &String| -> Vec<&HouseResult> {
                houses
                    .iter()
                    .copied()
                    .filter(|h| locations.get(&h.house_id) == Some(loc))
                    .collect()
            };
            let (ga, gb) = (members(a), members(b));
            if ga.is_empty() || gb.is_empty() {
                continue;
            }
            for m in Method::ALL {
                let xa: Vec<f64> = ga.iter().map(|h| h.mean(m)).collect();
                let xb: Vec<f64> = gb.iter().map(|h| h.mean(m)).collect();
                let test = mann_whitney_u(&xa, &xb);
                significance.push(Significance {
                    method: m,
                    pair: *pair,
                    group_a: a.clone(),
                    group_b: b.clone(),
                    ids_a: ga.iter().map(|h| h.house_id.clone()).collect(),
                    ids_b: gb.iter().map(|h| h.house_id.clone()).collect(),
                    u: test.u,
                    p: test.p,
                    significant: test.p < 0.05,
                });
            }
        }
    }
    let final_rank = final_ranks(&pairs.iter().map(|p| p.rank.clone()).collect::<Vec<_>>());
    Ok(EvaluationReport {
        pairs,
        final_rank,
        significance,
        failures: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_final_ranks() {
        // per-pair ranks of the ten listed methods, in Method::ALL order
        let ranks = vec![
            vec![11.0, 10.0, 3.0, 1.0, 6.0, 8.0, 2.0, 4.0, 7.0, 5.0],
            vec![5.0, 11.0, 8.0, 10.0, 7.0, 9.0, 1.0, 2.0, 3.0, 4.0],
            vec![9.0, 4.0, 5.0, 10.0, 11.0, 7.0, 3.0, 2.0, 8.0, 1.0],
            vec![7.0, 2.5, 6.0, 10.0, 11.0, 8.0, 4.5, 4.5, 9.0, 2.5],
        ];
        let f = final_ranks(&ranks);
        assert_eq!(f[Method::PsoBox01.index()], 1.0);
        assert_eq!(f[Method::PsoConvex.index()], 2.5);
        assert_eq!(f[Method::RecursiveEnsemble.index()], 2.5);
        assert_eq!(f[Method::Svr.index()], 10.0);
    }

    #[test]
    fn published_medians_tie() {
        // five-minute horizon medians of the ten listed methods
        let med = [0.275, 0.266, 0.269, 1.884, 2.811, 0.725, 0.267, 0.267, 0.832, 0.266];
        let r = rank_values(&med);
        assert_eq!(r[Method::Sarima.index()], r[Method::RecursiveEnsemble.index()]);
        assert_eq!(r[Method::PsoBox01.index()], r[Method::PsoConvex.index()]);
        assert_eq!(r[Method::Svr.index()], 10.0);
    }
}
