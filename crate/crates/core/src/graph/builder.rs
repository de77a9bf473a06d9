use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{argmax_label, derive_edges, mean, voxel_key, NodeId, ObjectNode, PredicateConfig, SceneGraph, NODE_VOXEL};
use crate::error::{Error, Result};
use crate::geometry::{containment_ratio, fit_obb, fit_obb_lenient, OrientedBox};
use crate::math::Vec3;
use crate::sensing::{NoiseConfig, TaggedPointCloud};

/// One instance segment of one view, lifted to 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Frame-local instance tag.
    pub tag: u32,
    pub view: u32,
    pub label: String,
    pub points: Vec<Vec3>,
    pub bbox: OrientedBox,
    /// Ground-truth object index. Only the evaluator and oracle association read it.
    pub(crate) truth: Option<usize>,
}

impl Detection {
    pub fn new(tag: u32, view: u32, label: impl Into<String>, points: Vec<Vec3>) -> Result<Self> {
        let bbox = fit_obb(&points)?;
        Ok(Self {
            tag,
            view,
            label: label.into(),
            points,
            bbox,
            truth: None,
        })
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn ground_truth_index(&self) -> Option<usize> {
        self.truth
    }

    pub fn with_ground_truth(mut self, index: usize) -> Self {
        self.truth = Some(index);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssociationMode {
    /// Geometric + semantic scoring against existing nodes.
    #[default]
    Geometric,
    /// Merge by sealed ground-truth instance id. Test mode only.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationConfig {
    pub geometric_weight: f64,
    pub semantic_weight: f64,
    /// Minimum score to merge into an existing node.
    pub threshold: f64,
    /// Segments with fewer points are dropped.
    pub min_points: usize,
    pub mode: AssociationMode,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        Self {
            geometric_weight: 0.6,
            semantic_weight: 0.4,
            threshold: 0.5,
            min_points: 5,
            mode: AssociationMode::Geometric,
        }
    }
}

impl AssociationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.geometric_weight >= 0.0 && self.semantic_weight >= 0.0 && self.geometric_weight + self.semantic_weight > 0.0) {
            return Err(Error::InvalidConfig(String::from("association weights must be nonnegative and not both zero")));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig(format!("association.threshold {} outside [0, 1]", self.threshold)));
        }
        if self.min_points < 4 {
            return Err(Error::InvalidConfig(String::from("association.min_points must be at least 4")));
        }
        Ok(())
    }
}

/// Groups object points by instance tag, drops small segments, fits a box per segment
/// and applies label flips with probability `noise.label_flip_prob`.
pub fn extract_detections<R: Rng>(
    cloud: &TaggedPointCloud,
    min_points: usize,
    noise: &NoiseConfig,
    vocabulary: &[String],
    rng: &mut R,
) -> Vec<Detection> {
    let mut groups: BTreeMap<u32, Vec<Vec3>> = BTreeMap::new();
    for p in &cloud.points {
        if let Some(tag) = p.tag {
            groups.entry(tag).or_default().push(p.position);
        }
    }
    let mut out = Vec::new();
    for (tag, points) in groups {
        // one draw per segment, kept or not, so later segments see a fixed stream
        let flip_draw: f64 = rng.random();
        let pick: usize = rng.random_range(0..vocabulary.len().max(1));
        if points.len() < min_points.max(1) {
            continue;
        }
        let Ok(bbox) = fit_obb(&points) else { continue };
        let mut label = cloud.tag_label(tag).map(String::from).unwrap_or_default();
        if flip_draw < noise.label_flip_prob {
            let others: Vec<&String> = vocabulary.iter().filter(|l| **l != label).collect();
            if !others.is_empty() {
                label = others[pick % others.len()].clone();
            }
        }
        out.push(Detection {
            tag,
            view: cloud.view,
            label,
            points,
            bbox,
            truth: cloud.ground_truth_index(tag),
        });
    }
    out
}

/// Association decision for one detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assignment {
    Existing(NodeId),
    New,
}

/// Mutual box containment: the larger of the two containment ratios.
pub(crate) fn geometric_overlap(a: &OrientedBox, b: &OrientedBox) -> f64 {
    containment_ratio(a, b).max(containment_ratio(b, a))
}

/// Scores every (detection, node) pair as `w_g * overlap + w_s * similarity` and assigns
/// greedily in descending score order. A node takes at most one detection per view;
/// detections left without a pair scoring at least the threshold become new nodes.
pub fn associate(
    graph: &SceneGraph,
    detections: &[Detection],
    similarity: &dyn Fn(&str, &str) -> f64,
    cfg: &AssociationConfig,
) -> Vec<Assignment> {
    let mut candidates: Vec<(f64, usize, &NodeId)> = Vec::new();
    for (di, det) in detections.iter().enumerate() {
        let (dmin, dmax) = det.bbox.aabb();
        for (id, node) in &graph.nodes {
            let (nmin, nmax) = node.bbox.aabb();
            let disjoint = dmin.x > nmax.x || nmin.x > dmax.x || dmin.y > nmax.y || nmin.y > dmax.y || dmin.z > nmax.z || nmin.z > dmax.z;
            let geo = if disjoint { 0.0 } else { geometric_overlap(&det.bbox, &node.bbox) };
            let score = cfg.geometric_weight * geo + cfg.semantic_weight * similarity(&det.label, &node.label);
            if score >= cfg.threshold {
                candidates.push((score, di, id));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
    let mut out = alloc::vec![Assignment::New; detections.len()];
    let mut taken: BTreeMap<(&NodeId, u32), ()> = BTreeMap::new();
    let mut done = alloc::vec![false; detections.len()];
    for (_, di, id) in candidates {
        if done[di] || taken.contains_key(&(id, detections[di].view)) {
            continue;
        }
        done[di] = true;
        taken.insert((id, detections[di].view), ());
        out[di] = Assignment::Existing(id.clone());
    }
    out
}

fn downsample_into(points: &mut Vec<Vec3>, voxels: &mut alloc::collections::BTreeSet<super::VoxelKey>, new: &[Vec3]) {
    for p in new {
        if voxels.insert(voxel_key(*p, NODE_VOXEL)) {
            points.push(*p);
        }
    }
}

/// Merges a detection into a node: voxel-downsampled point union (first point per voxel
/// is kept), box refit, label histogram update.
pub fn fuse_node(node: &ObjectNode, det: &Detection, step: u32) -> ObjectNode {
    let mut out = node.clone();
    downsample_into(&mut out.points, &mut out.voxels, &det.points);
    out.point_count = out.points.len();
    out.centroid = mean(&out.points);
    if let Some(b) = fit_obb_lenient(&out.points) {
        out.bbox = b;
    }
    *out.histogram.entry(det.label.clone()).or_insert(0) += 1;
    out.label = argmax_label(&out.histogram).unwrap_or_else(|| det.label.clone());
    out.last_step = out.last_step.max(step);
    if out.truth.is_none() {
        out.truth = det.truth;
    }
    out
}

fn node_from_detection(id: NodeId, det: &Detection, step: u32) -> ObjectNode {
    let mut node = ObjectNode::from_points(id, &det.label, Vec::new(), Some(det.bbox), step);
    downsample_into(&mut node.points, &mut node.voxels, &det.points);
    node.point_count = node.points.len();
    node.centroid = mean(&node.points);
    if let Some(b) = fit_obb_lenient(&node.points) {
        node.bbox = b;
    }
    node.truth = det.truth;
    node
}

/// Owns a scene graph and applies per-view detection batches to it.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    graph: SceneGraph,
    association: AssociationConfig,
    predicates: PredicateConfig,
    next_id: u32,
    oracle_index: BTreeMap<usize, NodeId>,
}

impl GraphBuilder {
    pub fn new(association: AssociationConfig, predicates: PredicateConfig) -> Self {
        Self {
            graph: SceneGraph::default(),
            association,
            predicates,
            next_id: 0,
            oracle_index: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &SceneGraph {
        &self.graph
    }

    pub fn into_graph(self) -> SceneGraph {
        self.graph
    }

    pub fn set_step(&mut self, step: u32) {
        self.graph.step = step;
    }

    fn fresh_id(&mut self) -> NodeId {
        let id = format!("n{:04}", self.next_id);
        self.next_id += 1;
        id
    }

    /// Associates and fuses one batch of detections, then recomputes all edges.
    /// Returns the per-detection assignments that were applied.
    pub fn integrate(&mut self, detections: &[Detection], similarity: &dyn Fn(&str, &str) -> f64) -> Vec<Assignment> {
        let step = self.graph.step;
        let assignments = match self.association.mode {
            AssociationMode::Geometric => {
                let assignments = associate(&self.graph, detections, similarity, &self.association);
                for (det, assignment) in detections.iter().zip(&assignments) {
                    match assignment {
                        Assignment::Existing(id) => self.fuse_into(id, det, step),
                        Assignment::New => {
                            self.create(det, step);
                        }
                    }
                }
                assignments
            }
            AssociationMode::Oracle => detections
                .iter()
                .map(|det| match det.truth.and_then(|t| self.oracle_index.get(&t)).cloned() {
                    Some(id) => {
                        self.fuse_into(&id, det, step);
                        Assignment::Existing(id)
                    }
                    None => {
                        let id = self.create(det, step);
                        if let Some(t) = det.truth {
                            self.oracle_index.insert(t, id);
                        }
                        Assignment::New
                    }
                })
                .collect(),
        };
        self.graph.edges = derive_edges(self.graph.nodes.values(), &self.predicates);
        assignments
    }

    fn fuse_into(&mut self, id: &NodeId, det: &Detection, step: u32) {
        let fused = fuse_node(&self.graph.nodes[id], det, step);
        self.graph.nodes.insert(id.clone(), fused);
    }

    fn create(&mut self, det: &Detection, step: u32) -> NodeId {
        let id = self.fresh_id();
        self.graph.nodes.insert(id.clone(), node_from_detection(id.clone(), det, step));
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_in_obb;

    fn exact(a: &str, b: &str) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }

    fn cube_points(center: Vec3, half: f64, n: usize) -> Vec<Vec3> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let f = |t: usize| (t as f64 / (n - 1) as f64 * 2.0 - 1.0) * half;
                    pts.push(center + Vec3::new(f(i), f(j), f(k)));
                }
            }
        }
        pts
    }

    #[test]
    fn new_object_creates_node_and_reobservation_merges() {
        let mut b = GraphBuilder::new(AssociationConfig::default(), PredicateConfig::default());
        let det = Detection::new(0, 0, "chair", cube_points(Vec3::new(1.0, 1.0, 0.5), 0.3, 6)).unwrap();
        assert_eq!(b.integrate(core::slice::from_ref(&det), &exact), alloc::vec![Assignment::New]);
        let mut second = det.clone();
        second.view = 1;
        let a = b.integrate(&[second], &exact);
        assert_eq!(a, alloc::vec![Assignment::Existing("n0000".into())]);
        assert_eq!(b.graph().nodes.len(), 1);
        assert_eq!(b.graph().nodes["n0000"].histogram["chair"], 2);
    }

    #[test]
    fn one_detection_per_node_per_view() {
        let mut b = GraphBuilder::new(AssociationConfig::default(), PredicateConfig::default());
        let det = Detection::new(0, 0, "chair", cube_points(Vec3::new(1.0, 1.0, 0.5), 0.3, 6)).unwrap();
        b.integrate(core::slice::from_ref(&det), &exact);
        let mut d1 = det.clone();
        d1.view = 1;
        let mut d2 = det.clone();
        d2.view = 1;
        d2.tag = 1;
        let a = associate(b.graph(), &[d1, d2], &exact, &AssociationConfig::default());
        assert_eq!(a, alloc::vec![Assignment::Existing("n0000".into()), Assignment::New]);
    }

    #[test]
    fn fusing_identical_detection_is_idempotent() {
        let det = Detection::new(0, 0, "cup", cube_points(Vec3::new(0.0, 0.0, 0.8), 0.05, 5)).unwrap();
        let node = node_from_detection("n0".into(), &det, 0);
        let once = fuse_node(&node, &det, 1);
        let twice = fuse_node(&once, &det, 2);
        assert_eq!(once.points, twice.points);
        assert_eq!(once.bbox, twice.bbox);
        assert_eq!(once.centroid, twice.centroid);
        assert!(twice.points.iter().all(|p| point_in_obb(*p, &twice.bbox)));
    }

    #[test]
    fn histogram_majority_label() {
        let pts = cube_points(Vec3::new(0.0, 0.0, 0.8), 0.2, 4);
        let cup = Detection::new(0, 0, "cup", pts.clone()).unwrap();
        let mug = Detection::new(0, 1, "mug", pts).unwrap();
        let n = node_from_detection("n0".into(), &mug, 0);
        let n = fuse_node(&n, &cup, 1);
        let n = fuse_node(&n, &cup, 2);
        assert_eq!(n.label, "cup");
        assert_eq!(n.histogram["cup"], 2);
        assert_eq!(n.histogram["mug"], 1);
    }

    #[test]
    fn association_config_validation() {
        assert!(AssociationConfig::default().validate().is_ok());
        assert!(AssociationConfig { threshold: 1.5, ..Default::default() }.validate().is_err());
        assert!(AssociationConfig { min_points: 2, ..Default::default() }.validate().is_err());
    }
}
