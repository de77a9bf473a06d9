//! Command bodies, kept free of argument parsing so tests can call them directly.

use std::fmt::Write as _;
use std::path::Path;

use activesg_core::eval::{edge_metrics, match_nodes, node_metrics, MatchConfig, Matching, Metrics, SimilarityConfig};
use activesg_core::graph::{derive_edges, PredicateConfig, RelationEdge, SceneGraph};
use activesg_core::world::generate::{generate, Family};
use activesg_core::world::ground_truth_graph;
use serde_json::{json, Value};

use crate::error::{parse, read, CliError, FileError};
use crate::scene::{parse_scene, scene_to_string};
use crate::snapshot::parse_graph;

pub fn gen_world(family: Family, seed: u64, out: &Path) -> Result<(), CliError> {
    let world = generate(family, seed).map_err(|e| anyhow::anyhow!("generating {family} world {seed}: {e}"))?;
    std::fs::write(out, scene_to_string(&world)).map_err(|source| FileError::Io { path: out.to_path_buf(), source })?;
    Ok(())
}

/// Loads a graph snapshot, or the ground-truth graph of a scene file (told apart by the
/// scene's `floor_z` key).
pub fn load_graph_or_scene(path: &Path, predicates: &PredicateConfig) -> Result<SceneGraph, FileError> {
    let text = read(path)?;
    let probe: Value = parse(path, &text)?;
    if probe.get("floor_z").is_some() {
        Ok(ground_truth_graph(&parse_scene(path, &text)?, predicates))
    } else {
        parse_graph(path, &text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub nodes: Metrics,
    pub edges: Metrics,
    pub matching: Matching,
}

pub fn evaluate(pred: &SceneGraph, gt: &SceneGraph, sim: &SimilarityConfig, matching: &MatchConfig) -> EvalReport {
    let m = match_nodes(pred, gt, sim, matching);
    EvalReport { nodes: node_metrics(&m, pred, gt), edges: edge_metrics(&m, pred, gt), matching: m }
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let n = &self.nodes;
        let e = &self.edges;
        let mut s = String::new();
        let _ = writeln!(s, "precision {}\nrecall {}\nf1 {}", n.precision, n.recall, n.f1);
        let _ = writeln!(s, "matched {} pred {} gt {}", n.matched, n.pred, n.gt);
        let _ = writeln!(s, "edges precision {} recall {} f1 {}", e.precision, e.recall, e.f1);
        for p in &self.matching.pairs {
            let _ = writeln!(s, "match {} {} similarity {} distance {}", p.pred, p.gt, p.similarity, p.distance);
        }
        s
    }

    pub fn to_json(&self) -> String {
        let metrics = |m: &Metrics| {
            json!({"precision": m.precision, "recall": m.recall, "f1": m.f1, "matched": m.matched, "pred": m.pred, "gt": m.gt})
        };
        let matches: Vec<Value> = self
            .matching
            .pairs
            .iter()
            .map(|p| json!({"pred": p.pred, "gt": p.gt, "similarity": p.similarity, "distance": p.distance}))
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({"nodes": metrics(&self.nodes), "edges": metrics(&self.edges), "matches": matches}))
            .expect("report serializes");
        s.push('\n');
        s
    }
}

/// Edges derived from the file's nodes (stored edges are ignored), one `src relation dst`
/// line each, sorted by (src, dst).
pub fn edges_text(path: &Path, predicates: &PredicateConfig) -> Result<String, FileError> {
    let graph = load_graph_or_scene(path, predicates)?;
    let edges = derive_edges(graph.nodes.values(), predicates);
    Ok(format_edges(&edges))
}

pub fn format_edges<'a>(edges: impl IntoIterator<Item = &'a RelationEdge>) -> String {
    let mut s = String::new();
    for e in edges {
        let _ = writeln!(s, "{} {} {}", e.src, e.relation, e.dst);
    }
    s
}
