//! Graph snapshot files.
//!
//! ```json
//! {
//!   "step": 3,
//!   "nodes": [{"id": "n0", "label": "cup", "histogram": {"cup": 2},
//!              "centroid": [1.0, 2.0, 0.8],
//!              "box": {"center": [1.0, 2.0, 0.8], "half_extents": [0.05, 0.05, 0.05], "yaw": 0.0},
//!              "point_count": 40, "first_step": 0, "last_step": 3}],
//!   "edges": [{"src": "n0", "dst": "n1", "relation": "on_top_of"}]
//! }
//! ```
//!
//! Nodes are sorted by id and edges by (src, dst, relation), so snapshots of equal graphs
//! are byte-identical. Points are not stored.

use std::collections::BTreeMap;
use std::path::Path;

use activesg_core::geometry::OrientedBox;
use activesg_core::graph::{ObjectNode, Relation, RelationEdge, SceneGraph};
use activesg_core::math::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{parse, read, FileError};
use crate::scene::BoxEntry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: String,
    label: String,
    histogram: BTreeMap<String, u32>,
    centroid: [f64; 3],
    #[serde(rename = "box")]
    bbox: BoxEntry,
    point_count: usize,
    first_step: u32,
    last_step: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    src: String,
    dst: String,
    relation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    step: u32,
    nodes: Vec<NodeEntry>,
    edges: Vec<EdgeEntry>,
}

pub fn graph_to_string(graph: &SceneGraph) -> String {
    let file = GraphFile {
        step: graph.step,
        nodes: graph
            .nodes
            .values()
            .map(|n| NodeEntry {
                id: n.id.clone(),
                label: n.label.clone(),
                histogram: n.histogram.clone(),
                centroid: n.centroid.to_array(),
                bbox: BoxEntry::from(&n.bbox),
                point_count: n.point_count,
                first_step: n.first_step,
                last_step: n.last_step,
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| EdgeEntry { src: e.src.clone(), dst: e.dst.clone(), relation: e.relation.as_str().to_string() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("graph serializes");
    s.push('\n');
    s
}

/// Parses a snapshot. Labels must equal the histogram argmax, ids must be unique and edges
/// must satisfy the graph invariants.
pub fn parse_graph(path: &Path, text: &str) -> Result<SceneGraph, FileError> {
    let file: GraphFile = parse(path, text)?;
    let mut graph = SceneGraph { step: file.step, ..SceneGraph::default() };
    for (i, n) in file.nodes.into_iter().enumerate() {
        if n.histogram.is_empty() || n.histogram.values().any(|&c| c == 0) {
            return Err(FileError::invalid(path, format!("nodes[{i}].histogram counts must be at least 1")));
        }
        let bbox = OrientedBox::from(&n.bbox);
        if !bbox.half_extents.is_finite() || [bbox.half_extents.x, bbox.half_extents.y, bbox.half_extents.z].iter().any(|&h| h <= 0.0) {
            return Err(FileError::invalid(path, format!("nodes[{i}].box half extents must be positive")));
        }
        let node = ObjectNode::from_summary(
            n.id.clone(),
            n.histogram,
            Vec3::from_array(n.centroid),
            bbox,
            n.point_count,
            n.first_step,
            n.last_step,
        );
        if node.label != n.label {
            return Err(FileError::invalid(path, format!("nodes[{i}].label `{}` is not the histogram argmax `{}`", n.label, node.label)));
        }
        if graph.nodes.insert(n.id.clone(), node).is_some() {
            return Err(FileError::invalid(path, format!("duplicate id `{}`", n.id)));
        }
    }
    for (i, e) in file.edges.into_iter().enumerate() {
        let relation: Relation = e.relation.parse().map_err(|m: String| FileError::invalid(path, format!("edges[{i}]: {m}")))?;
        graph.edges.insert(RelationEdge { src: e.src, dst: e.dst, relation });
    }
    graph.check_invariants().map_err(|m| FileError::invalid(path, m))?;
    Ok(graph)
}

pub fn load_graph(path: &Path) -> Result<SceneGraph, FileError> {
    parse_graph(path, &read(path)?)
}

pub fn save_graph(graph: &SceneGraph, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, graph_to_string(graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use activesg_core::graph::{derive_edges, PredicateConfig};

    fn cup_on_table() -> SceneGraph {
        let mut g = SceneGraph::default();
        let mut add = |id: &str, label: &str, c: Vec3, h: Vec3| {
            let hist = BTreeMap::from([(label.to_string(), 1)]);
            g.nodes.insert(id.into(), ObjectNode::from_summary(id.into(), hist, c, OrientedBox::new(c, h, 0.0), 10, 0, 0));
        };
        add("cup", "cup", Vec3::new(0.0, 0.0, 0.8), Vec3::new(0.05, 0.05, 0.05));
        add("table", "table", Vec3::new(0.0, 0.0, 0.375), Vec3::new(0.6, 0.4, 0.375));
        g.edges = derive_edges(g.nodes.values(), &PredicateConfig::default());
        g
    }

    #[test]
    fn round_trip_is_exact() {
        let g = cup_on_table();
        let text = graph_to_string(&g);
        let back = parse_graph(Path::new("g.json"), &text).unwrap();
        assert_eq!(back, g);
        assert_eq!(graph_to_string(&back), text);
    }

    #[test]
    fn broken_inverse_is_rejected() {
        let text = graph_to_string(&cup_on_table()).replace("supported_by", "next_to");
        let err = parse_graph(Path::new("g.json"), &text).unwrap_err().to_string();
        assert!(err.contains("inverse"), "{err}");
    }

    #[test]
    fn unknown_relation_is_rejected() {
        let text = graph_to_string(&cup_on_table()).replace("supported_by", "beside");
        assert!(parse_graph(Path::new("g.json"), &text).unwrap_err().to_string().contains("unknown relation"));
    }
}
