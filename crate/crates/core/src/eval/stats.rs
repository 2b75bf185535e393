use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

/// Ascending fractional ranks: values within 1e-9 of the first member of a
/// run share the average of their positions.
pub fn rank_values(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && (values[order[j]] - values[order[i]]).abs() <= 1e-9 {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

pub fn rank_methods<K: Ord + Clone>(medians: &BTreeMap<K, f64>) -> BTreeMap<K, f64> {
    let values: Vec<f64> = medians.values().copied().collect();
    medians.keys().cloned().zip(rank_values(&values)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// The smaller of the two U statistics.
    pub u: f64,
    pub p: f64,
}

fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided test by enumerating every split of the pooled values into
/// groups of the original sizes. Cost grows as C(n1 + n2, n1).
pub fn mann_whitney_u_exact(a: &[f64], b: &[f64]) -> MannWhitney {
    let (n1, n2) = (a.len(), b.len());
    let total = (n1 * n2) as f64;
    let ua = u_statistic(a, b);
    let observed = ua.min(total - ua);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let (mut hits, mut count) = (0u64, 0u64);
    let mut ga = Vec::with_capacity(n1);
    let mut gb = Vec::with_capacity(n2);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        ga.clear();
        gb.clear();
        for (i, v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ga.push(*v);
            } else {
                gb.push(*v);
            }
        }
        let u = u_statistic(&ga, &gb);
        count += 1;
        if u.min(total - u) <= observed + 1e-12 {
            hits += 1;
        }
    }
    MannWhitney {
        u: observed,
        p: hits as f64 / count as f64,
    }
}

/// Exact for pooled size up to 12, otherwise the tie-corrected normal
/// approximation with continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> MannWhitney {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return MannWhitney { u: 0.0, p: 1.0 };
    }
    if n1 + n2 <= 12 {
        return mann_whitney_u_exact(a, b);
    }
    let total = (n1 * n2) as f64;
    let ua = u_statistic(a, b);
    let u = ua.min(total - ua);
    let n = (n1 + n2) as f64;
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = total / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return MannWhitney { u, p: 1.0 };
    }
    let z = ((total / 2.0 - u).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    MannWhitney {
        u,
        p: (2.0 * normal.sf(z)).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank_values(&[1.0, 2.0]), vec![1.0, 2.0]);
        assert_eq!(rank_values(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank_values(&[3.0, 1.0, 2.0, 1.0 + 1e-12]), vec![4.0, 1.5, 3.0, 1.5]);
        let m: BTreeMap<&str, f64> = [("a", 1.0), ("b", 2.0)].into_iter().collect();
        assert_eq!(rank_methods(&m)["b"], 2.0);
    }

    #[test]
    fn separated_pairs() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(r.u, 0.0);
        assert_eq!(r.p, 1.0 / 3.0);
    }

    #[test]
    fn identical_groups() {
        let a = [0.3, 0.5, 0.5, 0.9];
        let r = mann_whitney_u(&a, &a);
        assert_eq!(r.p, 1.0);
        let r = mann_whitney_u(&[2.0; 3], &[2.0; 4]);
        assert_eq!(r.u, 6.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn normal_approximation_for_large_groups() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (0..20).map(|v| f64::from(v) + 30.0).collect();
        let r = mann_whitney_u(&a, &b);
        assert_eq!(r.u, 0.0);
        assert!(r.p < 1e-6);
        let same = mann_whitney_u(&a, &a);
        assert!(same.p > 0.9);
    }
}
