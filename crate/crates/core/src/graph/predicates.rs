use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ObjectNode, Relation, RelationEdge};
use crate::error::{Error, Result};
use crate::geometry::{containment_ratio, footprint_gap, footprint_overlap};

/// Thresholds of the geometric edge predicates. Fixed per experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredicateConfig {
    /// Max |bottom(a) - top(b)| for vertical contact, m.
    pub contact_gap: f64,
    /// Max vertical gap for under/over, m.
    pub vertical_gap_max: f64,
    /// Min footprint overlap ratio for the vertical relations.
    pub overlap_min: f64,
    /// Min containment ratio for `inside`.
    pub inside_min: f64,
    /// Max horizontal footprint gap for `next_to`, m.
    pub near_gap: f64,
    /// Max centroid height difference for `next_to`, m.
    pub height_similarity: f64,
}

impl Default for PredicateConfig {
    fn default() -> Self {
        Self {
            contact_gap: 0.05,
            vertical_gap_max: 0.5,
            overlap_min: 0.3,
            inside_min: 0.9,
            near_gap: 0.3,
            height_similarity: 0.3,
        }
    }
}

impl PredicateConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("contact_gap", self.contact_gap),
            ("vertical_gap_max", self.vertical_gap_max),
            ("overlap_min", self.overlap_min),
            ("inside_min", self.inside_min),
            ("near_gap", self.near_gap),
            ("height_similarity", self.height_similarity),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("predicates.{name} must be positive")));
            }
        }
        if self.inside_min > 1.0 {
            return Err(Error::InvalidConfig(String::from("predicates.inside_min must be in (0, 1]")));
        }
        Ok(())
    }
}

fn on_top_of(a: &ObjectNode, b: &ObjectNode, cfg: &PredicateConfig) -> bool {
    (a.bbox.bottom_z() - b.bbox.top_z()).abs() <= cfg.contact_gap && footprint_overlap(&a.bbox, &b.bbox) >= cfg.overlap_min
}

fn under(a: &ObjectNode, b: &ObjectNode, cfg: &PredicateConfig) -> bool {
    let (top_a, bottom_b) = (a.bbox.top_z(), b.bbox.bottom_z());
    top_a < bottom_b && bottom_b - top_a <= cfg.vertical_gap_max && footprint_overlap(&a.bbox, &b.bbox) >= cfg.overlap_min
}

fn over(a: &ObjectNode, b: &ObjectNode, cfg: &PredicateConfig) -> bool {
    let (bottom_a, top_b) = (a.bbox.bottom_z(), b.bbox.top_z());
    top_b < bottom_a && bottom_a - top_b <= cfg.vertical_gap_max && footprint_overlap(&a.bbox, &b.bbox) >= cfg.overlap_min
}

fn next_to(a: &ObjectNode, b: &ObjectNode, cfg: &PredicateConfig) -> bool {
    (a.centroid.z - b.centroid.z).abs() <= cfg.height_similarity && footprint_gap(&a.bbox, &b.bbox) <= cfg.near_gap
}

/// Horizontal distance between the axis-aligned bounds; a lower bound on the footprint gap.
fn horizontal_aabb_gap(a: &ObjectNode, b: &ObjectNode) -> f64 {
    let (amin, amax) = a.bbox.aabb();
    let (bmin, bmax) = b.bbox.aabb();
    let dx = (bmin.x - amax.x).max(amin.x - bmax.x).max(0.0);
    let dy = (bmin.y - amax.y).max(amin.y - bmax.y).max(0.0);
    crate::math::sqrt(dx * dx + dy * dy)
}

/// Relation of the ordered pair `(a, b)`: the first predicate that holds in the order
/// on top of / supported by, under / over, inside, next to.
pub fn classify_pair(a: &ObjectNode, b: &ObjectNode, cfg: &PredicateConfig) -> Option<Relation> {
    // Every predicate needs the footprints to overlap or lie within `near_gap`.
    if horizontal_aabb_gap(a, b) > cfg.near_gap {
        return None;
    }
    if on_top_of(a, b, cfg) {
        return Some(Relation::OnTopOf);
    }
    if on_top_of(b, a, cfg) {
        return Some(Relation::SupportedBy);
    }
    if under(a, b, cfg) {
        return Some(Relation::Under);
    }
    if over(a, b, cfg) {
        return Some(Relation::Over);
    }
    if containment_ratio(&a.bbox, &b.bbox) >= cfg.inside_min {
        return Some(Relation::Inside);
    }
    if next_to(a, b, cfg) {
        return Some(Relation::NextTo);
    }
    None
}

/// Edges over every ordered pair of nodes.
///
/// For each unordered pair both directions are classified. A vertical relation found in
/// either direction fixes both edges (the inverse label goes on the reverse pair); when
/// both directions report one, the higher-priority family wins, then the direction
/// whose source id sorts first. `inside` and `next_to` are kept per direction. The result
/// depends only on node ids and geometry, not on iteration order.
pub fn derive_edges<'a>(nodes: impl IntoIterator<Item = &'a ObjectNode>, cfg: &PredicateConfig) -> BTreeSet<RelationEdge> {
    let mut sorted: Vec<&ObjectNode> = nodes.into_iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges = BTreeSet::new();
    let mut push = |src: &ObjectNode, dst: &ObjectNode, relation: Relation| {
        edges.insert(RelationEdge {
            src: src.id.clone(),
            dst: dst.id.clone(),
            relation,
        });
    };
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            let (a, b) = (sorted[i], sorted[j]);
            let ab = classify_pair(a, b, cfg);
            let ba = classify_pair(b, a, cfg);
            let vertical = |r: Option<Relation>, level: u8| r.filter(|r| r.priority() == level && r.inverse().is_some());
            let mut resolved = false;
            for level in 0..2 {
                if let Some(r) = vertical(ab, level) {
                    push(a, b, r);
                    push(b, a, r.inverse().expect("vertical relations have inverses"));
                    resolved = true;
                } else if let Some(r) = vertical(ba, level) {
                    push(b, a, r);
                    push(a, b, r.inverse().expect("vertical relations have inverses"));
                    resolved = true;
                }
                if resolved {
                    break;
                }
            }
            if !resolved {
                if let Some(r) = ab {
                    push(a, b, r);
                }
                if let Some(r) = ba {
                    push(b, a, r);
                }
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{obb_corners, OrientedBox};
    use crate::math::Vec3;

    fn node(id: &str, b: OrientedBox) -> ObjectNode {
        ObjectNode::from_points(id.into(), id, obb_corners(&b).to_vec(), Some(b), 0)
    }

    fn table() -> ObjectNode {
        node("table", OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 0.375), Vec3::new(0.6, 0.4, 0.375)))
    }

    fn cup() -> ObjectNode {
        node("cup", OrientedBox::axis_aligned(Vec3::new(0.1, 0.0, 0.8), Vec3::new(0.04, 0.04, 0.05)))
    }

    #[test]
    fn cup_on_table() {
        let cfg = PredicateConfig::default();
        assert_eq!(classify_pair(&cup(), &table(), &cfg), Some(Relation::OnTopOf));
        assert_eq!(classify_pair(&table(), &cup(), &cfg), Some(Relation::SupportedBy));
        let edges = derive_edges([&table(), &cup()], &cfg);
        let expected: BTreeSet<RelationEdge> = [
            RelationEdge { src: "cup".into(), dst: "table".into(), relation: Relation::OnTopOf },
            RelationEdge { src: "table".into(), dst: "cup".into(), relation: Relation::SupportedBy },
        ]
        .into_iter()
        .collect();
        assert_eq!(edges, expected);
    }

    #[test]
    fn far_apart_has_no_relation() {
        let far = node("far", OrientedBox::axis_aligned(Vec3::new(10.0, 0.0, 0.375), Vec3::new(0.6, 0.4, 0.375)));
        assert_eq!(classify_pair(&far, &table(), &PredicateConfig::default()), None);
        assert!(derive_edges([&far, &table()], &PredicateConfig::default()).is_empty());
    }

    #[test]
    fn box_in_cabinet_is_inside() {
        let cabinet = node("cabinet", OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.5, 0.3, 1.0)));
        let item = node("box", OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 1.2), Vec3::new(0.1, 0.1, 0.1)));
        let cfg = PredicateConfig::default();
        assert_eq!(classify_pair(&item, &cabinet, &cfg), Some(Relation::Inside));
        // the cabinet is not inside the box, but they share a height band
        assert_eq!(classify_pair(&cabinet, &item, &cfg), Some(Relation::NextTo));
    }

    #[test]
    fn lamp_over_table_and_empty_sets() {
        let cfg = PredicateConfig::default();
        let lamp = node("lamp", OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 1.2), Vec3::new(0.2, 0.2, 0.1)));
        assert_eq!(classify_pair(&lamp, &table(), &cfg), Some(Relation::Over));
        assert_eq!(classify_pair(&table(), &lamp, &cfg), None);
        let edges = derive_edges([&lamp, &table()], &cfg);
        assert_eq!(edges.len(), 2);
        assert!(derive_edges(core::iter::empty(), &cfg).is_empty());
        assert!(derive_edges([&lamp], &cfg).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(PredicateConfig::default().validate().is_ok());
        let bad = PredicateConfig { inside_min: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PredicateConfig { near_gap: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
