//! Incremental 3D scene graph: object nodes, typed directed relation edges, multi-view
//! association and the fixed-priority geometric edge predicates.

mod builder;
mod predicates;

pub use builder::{
    associate, extract_detections, fuse_node, AssociationConfig, AssociationMode, Assignment, Detection,
    GraphBuilder,
};
pub use predicates::{classify_pair, derive_edges, PredicateConfig};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::geometry::{fit_obb_lenient, OrientedBox, MIN_HALF_EXTENT};
use crate::math::Vec3;

pub type NodeId = String;

/// Spatial relation from `src` to `dst`, e.g. "cup on_top_of table".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    OnTopOf,
    SupportedBy,
    Under,
    Over,
    Inside,
    NextTo,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::OnTopOf,
        Relation::SupportedBy,
        Relation::Under,
        Relation::Over,
        Relation::Inside,
        Relation::NextTo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::OnTopOf => "on_top_of",
            Relation::SupportedBy => "supported_by",
            Relation::Under => "under",
            Relation::Over => "over",
            Relation::Inside => "inside",
            Relation::NextTo => "next_to",
        }
    }

    /// The relation implied on the reversed pair, for the two vertical families.
    pub fn inverse(self) -> Option<Relation> {
        match self {
            Relation::OnTopOf => Some(Relation::SupportedBy),
            Relation::SupportedBy => Some(Relation::OnTopOf),
            Relation::Under => Some(Relation::Over),
            Relation::Over => Some(Relation::Under),
            Relation::Inside | Relation::NextTo => None,
        }
    }

    /// Position in the predicate priority order (0 evaluated first).
    pub fn priority(self) -> u8 {
        match self {
            Relation::OnTopOf | Relation::SupportedBy => 0,
            Relation::Under | Relation::Over => 1,
            Relation::Inside => 2,
            Relation::NextTo => 3,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| alloc::format!("unknown relation `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub relation: Relation,
}

/// Side length of the voxel grid used to downsample node points.
pub const NODE_VOXEL: f64 = 0.05;

pub(crate) type VoxelKey = [i64; 3];

pub(crate) fn voxel_key(p: Vec3, size: f64) -> VoxelKey {
    [
        libm::floor(p.x / size) as i64,
        libm::floor(p.y / size) as i64,
        libm::floor(p.z / size) as i64,
    ]
}

/// A fused 3D object instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectNode {
    pub id: NodeId,
    /// Histogram argmax, ties broken lexicographically.
    pub label: String,
    pub histogram: BTreeMap<String, u32>,
    /// Downsampled support points. Empty for nodes restored from a snapshot file.
    pub points: Vec<Vec3>,
    pub bbox: OrientedBox,
    /// Mean of `points` (or the stored value for snapshot nodes).
    pub centroid: Vec3,
    /// Number of support points; equals `points.len()` unless restored from a snapshot.
    pub point_count: usize,
    pub first_step: u32,
    pub last_step: u32,
    voxels: BTreeSet<VoxelKey>,
    /// Ground-truth object index, set only when built under oracle association.
    pub(crate) truth: Option<usize>,
}

impl ObjectNode {
    /// Node over raw (not downsampled) points. The box is fitted when not given.
    pub fn from_points(id: NodeId, label: &str, points: Vec<Vec3>, bbox: Option<OrientedBox>, step: u32) -> Self {
        let centroid = mean(&points);
        let bbox = bbox.or_else(|| fit_obb_lenient(&points)).unwrap_or_else(|| {
            OrientedBox::axis_aligned(centroid, Vec3::new(MIN_HALF_EXTENT, MIN_HALF_EXTENT, MIN_HALF_EXTENT))
        });
        let voxels = points.iter().map(|p| voxel_key(*p, NODE_VOXEL)).collect();
        let mut histogram = BTreeMap::new();
        histogram.insert(String::from(label), 1);
        Self {
            id,
            label: String::from(label),
            histogram,
            point_count: points.len(),
            points,
            bbox,
            centroid,
            first_step: step,
            last_step: step,
            voxels,
            truth: None,
        }
    }

    /// Node restored from stored summary values (snapshot files carry no points).
    pub fn from_summary(
        id: NodeId,
        histogram: BTreeMap<String, u32>,
        centroid: Vec3,
        bbox: OrientedBox,
        point_count: usize,
        first_step: u32,
        last_step: u32,
    ) -> Self {
        let label = argmax_label(&histogram).unwrap_or_default();
        Self {
            id,
            label,
            histogram,
            points: Vec::new(),
            bbox,
            centroid,
            point_count,
            first_step,
            last_step,
            voxels: BTreeSet::new(),
            truth: None,
        }
    }

    /// Ground-truth object index recorded under oracle association.
    pub fn oracle_source(&self) -> Option<usize> {
        self.truth
    }
}

pub(crate) fn mean(points: &[Vec3]) -> Vec3 {
    if points.is_empty() {
        return Vec3::ZERO;
    }
    points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / points.len() as f64
}

/// Highest count wins; equal counts resolve to the lexicographically smallest label.
pub fn argmax_label(histogram: &BTreeMap<String, u32>) -> Option<String> {
    let mut best: Option<(&String, u32)> = None;
    for (label, &count) in histogram {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((label, count));
        }
    }
    best.map(|(l, _)| l.clone())
}

/// Scene graph state: nodes keyed by id and the derived edge set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneGraph {
    pub nodes: BTreeMap<NodeId, ObjectNode>,
    pub edges: BTreeSet<RelationEdge>,
    pub step: u32,
}

impl SceneGraph {
    pub fn relation(&self, src: &str, dst: &str) -> Option<Relation> {
        self.edges.iter().find(|e| e.src == src && e.dst == dst).map(|e| e.relation)
    }

    /// Checks the structural invariants: endpoints exist, no self loops, at most one
    /// edge per ordered pair, and inverse consistency of the vertical relations.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut pairs: BTreeMap<(&str, &str), Relation> = BTreeMap::new();
        for e in &self.edges {
            if e.src == e.dst {
                return Err(alloc::format!("self edge on `{}`", e.src));
            }
            if !self.nodes.contains_key(&e.src) || !self.nodes.contains_key(&e.dst) {
                return Err(alloc::format!("edge {} -> {} references a missing node", e.src, e.dst));
            }
            if pairs.insert((e.src.as_str(), e.dst.as_str()), e.relation).is_some() {
                return Err(alloc::format!("more than one edge on {} -> {}", e.src, e.dst));
            }
        }
        for (&(s, d), r) in &pairs {
            if let Some(inv) = r.inverse() {
                if pairs.get(&(d, s)) != Some(&inv) {
                    return Err(alloc::format!("{s} {r} {d} lacks its inverse edge"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_argmax_with_ties() {
        let mut h = BTreeMap::new();
        h.insert(String::from("cup"), 2);
        h.insert(String::from("mug"), 1);
        assert_eq!(argmax_label(&h).as_deref(), Some("cup"));
        h.insert(String::from("mug"), 2);
        assert_eq!(argmax_label(&h).as_deref(), Some("cup"));
        h.insert(String::from("bowl"), 2);
        assert_eq!(argmax_label(&h).as_deref(), Some("bowl"));
    }

    #[test]
    fn relation_names_round_trip() {
        for r in Relation::ALL {
            assert_eq!(r.as_str().parse::<Relation>().unwrap(), r);
        }
        assert!("beside".parse::<Relation>().is_err());
    }
}
