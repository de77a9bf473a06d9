//! Node-level evaluation (joint semantic and geometric matching, precision/recall/F1)
//! and the static-camera and exploration experiment harnesses.

mod matching;
mod pipeline;
mod similarity;

pub use matching::{match_nodes, MatchConfig, MatchPair, Matching};
pub use pipeline::{
    run_exploration, run_static_cpm, start_pose, Exploration, PipelineConfig, Pipeline, Strategy, StaticRun,
};
pub use similarity::{semantic_similarity, SimilarityConfig, SimilarityMode};

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::{RelationEdge, SceneGraph};
use crate::math::sqrt;
use crate::planner::Viewpoint;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub pred: usize,
    pub gt: usize,
}

/// Precision, recall and F1 from counts. Empty denominators give 0.
pub fn prf(matched: usize, pred: usize, gt: usize) -> Metrics {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(matched, pred);
    let recall = ratio(matched, gt);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Metrics { precision, recall, f1, matched, pred, gt }
}

/// Node metrics of `pred` against `gt` under `matching`.
pub fn node_metrics(matching: &Matching, pred: &SceneGraph, gt: &SceneGraph) -> Metrics {
    prf(matching.len(), pred.nodes.len(), gt.nodes.len())
}

/// Edge metrics: predicted edges between matched nodes are mapped onto ground-truth ids
/// and compared as sets. Reported separately from the node metrics.
pub fn edge_metrics(matching: &Matching, pred: &SceneGraph, gt: &SceneGraph) -> Metrics {
    let mapped: BTreeSet<RelationEdge> = pred
        .edges
        .iter()
        .filter_map(|e| {
            Some(RelationEdge { src: String::from(matching.gt_of(&e.src)?), dst: String::from(matching.gt_of(&e.dst)?), relation: e.relation })
        })
        .collect();
    let hits = mapped.intersection(&gt.edges).count();
    prf(hits, pred.edges.len(), gt.edges.len())
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn aggregate(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u32,
    pub nodes: usize,
    pub metrics: Metrics,
    /// Viewpoint observed at this step; `None` for static runs.
    pub viewpoint: Option<Viewpoint>,
    /// Information gain of the selected viewpoint, when it was scored.
    pub gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsSeries {
    pub steps: Vec<StepRecord>,
    /// Why the run stopped before its step budget, if it did.
    pub terminated: Option<String>,
}

impl MetricsSeries {
    pub fn recall(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.metrics.recall).collect()
    }

    /// First step whose recall reaches `fraction` of the final recall.
    pub fn steps_to_fraction(&self, fraction: f64) -> Option<u32> {
        let last = self.steps.last()?.metrics.recall;
        self.steps.iter().find(|s| s.metrics.recall >= fraction * last - 1e-12).map(|s| s.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prf_arithmetic() {
        let m = prf(5, 10, 20);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 0.25);
        assert!((m.f1 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(prf(0, 4, 4).f1, 0.0);
        let p = prf(7, 7, 7);
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        assert_eq!(prf(0, 0, 3).precision, 0.0);
    }

    #[test]
    fn aggregate_uses_sample_std() {
        let (m, s) = aggregate(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(aggregate(&[4.0]), (4.0, 0.0));
    }
}
