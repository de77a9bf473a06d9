use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Sub};

use super::similarity::{semantic_similarity, SimilarityConfig};
use crate::error::{Error, Result};
use crate::graph::{NodeId, SceneGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    /// Maximum centroid distance of a match, m.
    pub tau_geo: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self { tau_geo: 1.0 }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_geo > 0.0) || !self.tau_geo.is_finite() {
            return Err(Error::InvalidConfig(String::from("matching.tau_geo must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchPair {
    pub pred: NodeId,
    pub gt: NodeId,
    pub similarity: f64,
    pub distance: f64,
}

/// One-to-one matching, sorted by predicted node id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pub pairs: Vec<MatchPair>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn gt_of(&self, pred: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.pred == pred).map(|p| p.gt.as_str())
    }
}

/// Lexicographic cost (minus cardinality, minus similarity, distance). Componentwise
/// arithmetic keeps it an ordered group, so the potential-based assignment algorithm
/// optimizes all three levels at once.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Cost([f64; 3]);

impl Cost {
    const INF: Cost = Cost([f64::INFINITY, 0.0, 0.0]);
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        for k in 0..3 {
            // sub-1e-12 differences come from rounding in the potentials
            let d = self.0[k] - o.0[k];
            if d.abs() > 1e-12 || (self.0[k].is_infinite() != o.0[k].is_infinite()) {
                return self.0[k].partial_cmp(&o.0[k]);
            }
        }
        Some(Ordering::Equal)
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, o: Cost) -> Cost {
        Cost([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// Minimum-cost perfect assignment on a square matrix (rows to columns).
fn hungarian(cost: &[Vec<Cost>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = alloc::vec![Cost::default(); n + 1];
    let mut v = alloc::vec![Cost::default(); n + 1];
    let mut p = alloc::vec![0usize; n + 1];
    let mut way = alloc::vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = alloc::vec![Cost::INF; n + 1];
        let mut used = alloc::vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = Cost::INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = alloc::vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Maximum-cardinality one-to-one matching over feasible pairs (similarity at least
/// `tau_sem` and centroid distance at most `tau_geo`). Among maximum matchings the total
/// similarity is maximized, then the total distance minimized.
pub fn match_nodes(pred: &SceneGraph, gt: &SceneGraph, sim: &SimilarityConfig, cfg: &MatchConfig) -> Matching {
    let p: Vec<_> = pred.nodes.values().collect();
    let g: Vec<_> = gt.nodes.values().collect();
    let n = p.len().max(g.len());
    if p.is_empty() || g.is_empty() {
        return Matching::default();
    }
    let mut feasible = alloc::vec![alloc::vec![None; g.len()]; p.len()];
    let mut cost = alloc::vec![alloc::vec![Cost::default(); n]; n];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            let d = a.centroid.distance(b.centroid);
            if d > cfg.tau_geo {
                continue;
            }
            let s = semantic_similarity(&a.label, &b.label, sim);
            if s >= sim.tau_sem {
                feasible[i][j] = Some((s, d));
                cost[i][j] = Cost([-1.0, -s, d]);
            }
        }
    }
    let assignment = hungarian(&cost);
    let mut pairs: Vec<MatchPair> = assignment
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < p.len() && j < g.len())
        .filter_map(|(i, &j)| {
            feasible[i][j].map(|(s, d)| MatchPair { pred: p[i].id.clone(), gt: g[j].id.clone(), similarity: s, distance: d })
        })
        .collect();
    pairs.sort_by(|a, b| a.pred.cmp(&b.pred));
    Matching { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: f64) -> Cost {
        Cost([a, 0.0, 0.0])
    }

    #[test]
    fn hungarian_small_cases() {
        let m = alloc::vec![alloc::vec![c(4.0), c(1.0), c(3.0)], alloc::vec![c(2.0), c(0.0), c(5.0)], alloc::vec![c(3.0), c(2.0), c(2.0)]];
        let a = hungarian(&m);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| m[i][j].0[0]).sum();
        assert_eq!(total, 5.0);
        assert_eq!(hungarian(&[alloc::vec![c(7.0)]]), alloc::vec![0]);
    }

    #[test]
    fn lexicographic_tie_break() {
        // both assignments have cardinality 2; the second has higher total similarity
        let m = alloc::vec![
            alloc::vec![Cost([-1.0, -0.5, 0.1]), Cost([-1.0, -1.0, 0.1])],
            alloc::vec![Cost([-1.0, -1.0, 0.1]), Cost([-1.0, -0.5, 0.1])],
        ];
        assert_eq!(hungarian(&m), alloc::vec![1, 0]);
    }
}
