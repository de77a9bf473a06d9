use std::collections::BTreeMap;

use activesg_core::eval::{match_nodes, prf, MatchConfig, SimilarityConfig};
use activesg_core::geometry::OrientedBox;
use activesg_core::graph::{derive_edges, ObjectNode, PredicateConfig, SceneGraph};
use activesg_core::math::{Pose, Vec3};
use activesg_core::planner::{entropy, select_nbv, CoverageMap, InfoGainResult, Viewpoint, VoxelState};
use proptest::prelude::*;

fn node(id: usize, label: &str, x: f64, y: f64) -> ObjectNode {
    let b = OrientedBox::axis_aligned(Vec3::new(x, y, 0.3), Vec3::new(0.2, 0.2, 0.3));
    ObjectNode::from_summary(format!("n{id}"), BTreeMap::from([(label.to_string(), 1)]), b.center, b, 4, 0, 0)
}

fn graph(items: &[(u8, f64, f64)]) -> SceneGraph {
    let labels = ["a", "b", "c"];
    let mut g = SceneGraph::default();
    for (i, &(l, x, y)) in items.iter().enumerate() {
        let n = node(i, labels[l as usize % 3], x, y);
        g.nodes.insert(n.id.clone(), n);
    }
    g
}

fn items(max: usize) -> impl Strategy<Value = Vec<(u8, f64, f64)>> {
    prop::collection::vec((0u8..3, 0.0..3.0f64, 0.0..3.0f64), 0..=max)
}

/// Best (cardinality, similarity sum, -distance sum) over every one-to-one assignment.
fn brute_force(pred: &SceneGraph, gt: &SceneGraph, tau_geo: f64) -> (usize, f64, f64) {
    let p: Vec<_> = pred.nodes.values().collect();
    let g: Vec<_> = gt.nodes.values().collect();
    fn go(i: usize, p: &[&ObjectNode], g: &[&ObjectNode], used: &mut Vec<bool>, tau: f64, acc: (usize, f64, f64), best: &mut (usize, f64, f64)) {
        if i == p.len() {
            let better = acc.0 > best.0 || (acc.0 == best.0 && (acc.1 > best.1 + 1e-9 || ((acc.1 - best.1).abs() <= 1e-9 && acc.2 < best.2 - 1e-9)));
            if better {
                *best = acc;
            }
            return;
        }
        go(i + 1, p, g, used, tau, acc, best);
        for j in 0..g.len() {
            let d = p[i].centroid.distance(g[j].centroid);
            if !used[j] && d <= tau && p[i].label == g[j].label {
                used[j] = true;
                go(i + 1, p, g, used, tau, (acc.0 + 1, acc.1 + 1.0, acc.2 + d), best);
                used[j] = false;
            }
        }
    }
    let mut best = (0, 0.0, f64::INFINITY);
    go(0, &p, &g, &mut vec![false; g.len()], tau_geo, (0, 0.0, 0.0), &mut best);
    if best.0 == 0 {
        best.2 = 0.0;
    }
    best
}

fn result(i: usize, gain: f64, path_len: u32) -> InfoGainResult {
    InfoGainResult {
        viewpoint: Viewpoint { cell: (i as i32 % 5, i as i32 / 5), yaw_bin: (i % 8) as u32, position: Vec3::ZERO, yaw: 0.0, path_len },
        h_prior: 0.0,
        h_posterior: 0.0,
        gain,
    }
}

proptest! {
    #[test]
    fn prf_stays_in_unit_interval(gt in 0usize..50, pred in 0usize..50, frac in 0.0..=1.0f64) {
        let matched = (frac * gt.min(pred) as f64).floor() as usize;
        let m = prf(matched, pred, gt);
        for v in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12 || m.f1 == 0.0);
    }

    #[test]
    fn entropy_is_bounded_by_support(weights in prop::collection::vec(0.0..10.0f64, 1..12)) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-9);
        let h = entropy(weights.iter().map(|w| w / total));
        let support = weights.iter().filter(|w| **w / total > 0.0).count() as f64;
        prop_assert!(h >= 0.0);
        prop_assert!(h <= support.log2() + 1e-9);
    }

    #[test]
    fn coverage_states_never_revert(updates in prop::collection::vec((0usize..24, 0u8..3), 0..80)) {
        let mut cov = CoverageMap::new(Vec3::ZERO, Vec3::new(2.0, 3.0, 1.0), 0.5);
        let label = cov.intern("chair");
        let mut first: Vec<Option<VoxelState>> = vec![None; cov.len()];
        for (v, s) in updates {
            let v = v % cov.len();
            let next = match s {
                0 => VoxelState::Unknown,
                1 => VoxelState::Free,
                _ => VoxelState::Occupied(label),
            };
            cov.set_state(v, next);
            if first[v].is_none() && next != VoxelState::Unknown {
                first[v] = Some(next);
            }
            for (i, f) in first.iter().enumerate() {
                prop_assert_eq!(cov.state(i), f.unwrap_or(VoxelState::Unknown));
            }
        }
    }

    #[test]
    fn matching_is_one_to_one_and_feasible(p in items(10), g in items(10), tau in 0.1..2.0f64) {
        let (pred, gt) = (graph(&p), graph(&g));
        let sim = SimilarityConfig::default();
        let m = match_nodes(&pred, &gt, &sim, &MatchConfig { tau_geo: tau });
        let mut seen_p = std::collections::BTreeSet::new();
        let mut seen_g = std::collections::BTreeSet::new();
        for pair in &m.pairs {
            prop_assert!(seen_p.insert(pair.pred.clone()));
            prop_assert!(seen_g.insert(pair.gt.clone()));
            let (a, b) = (&pred.nodes[&pair.pred], &gt.nodes[&pair.gt]);
            prop_assert!(a.centroid.distance(b.centroid) <= tau);
            prop_assert_eq!(&a.label, &b.label);
        }
    }

    #[test]
    fn matching_is_optimal_on_small_graphs(p in items(6), g in items(6), tau in 0.1..2.0f64) {
        let (pred, gt) = (graph(&p), graph(&g));
        let m = match_nodes(&pred, &gt, &SimilarityConfig::default(), &MatchConfig { tau_geo: tau });
        let (n, s, d) = brute_force(&pred, &gt, tau);
        prop_assert_eq!(m.len(), n);
        prop_assert!((m.pairs.iter().map(|x| x.similarity).sum::<f64>() - s).abs() < 1e-9);
        prop_assert!((m.pairs.iter().map(|x| x.distance).sum::<f64>() - d).abs() < 1e-9);
    }

    #[test]
    fn selection_ignores_input_order(gains in prop::collection::vec((-1.0..4.0f64, 0u32..4), 1..25), rot in 0usize..25) {
        let list: Vec<_> = gains.iter().enumerate().map(|(i, &(g, l))| result(i, (g * 2.0).round() / 2.0, l)).collect();
        let chosen = select_nbv(&list).unwrap();
        prop_assert!(list.iter().any(|r| r.viewpoint == chosen));
        let best = list.iter().map(|r| r.gain.max(0.0)).fold(0.0, f64::max);
        let winner = list.iter().find(|r| r.viewpoint == chosen).unwrap();
        prop_assert_eq!(winner.gain.max(0.0), best);
        let mut rotated = list.clone();
        rotated.rotate_left(rot % list.len());
        rotated.reverse();
        prop_assert_eq!(select_nbv(&rotated).unwrap(), chosen);
        prop_assert_eq!(select_nbv(&list).unwrap(), chosen);
    }

    #[test]
    fn derived_edges_satisfy_graph_invariants(boxes in prop::collection::vec((0.0..2.0f64, 0.0..2.0f64, 0.0..1.5f64, 0.05..0.6f64, 0.05..0.6f64, 0.05..0.5f64, -3.2..3.2f64), 0..10)) {
        let nodes: Vec<ObjectNode> = boxes
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z, hx, hy, hz, yaw))| {
                let b = OrientedBox::new(Vec3::new(x, y, z + hz), Vec3::new(hx, hy, hz), yaw);
                ObjectNode::from_summary(format!("n{i}"), BTreeMap::from([("a".to_string(), 1)]), b.center, b, 4, 0, 0)
            })
            .collect();
        let edges = derive_edges(&nodes, &PredicateConfig::default());
        let g = SceneGraph { nodes: nodes.iter().map(|n| (n.id.clone(), n.clone())).collect(), edges, step: 0 };
        prop_assert!(g.check_invariants().is_ok(), "{:?}", g.check_invariants());
    }

    #[test]
    fn pose_inverse_round_trips(x in -5.0..5.0f64, y in -5.0..5.0f64, z in 0.0..3.0f64, yaw in -3.2..3.2f64, pitch in -1.4..1.4f64,
                                px in -5.0..5.0f64, py in -5.0..5.0f64, pz in -5.0..5.0f64) {
        let pose = Pose::from_yaw_pitch(Vec3::new(x, y, z), yaw, pitch);
        let p = Vec3::new(px, py, pz);
        let back = pose.inverse().transform_point(pose.transform_point(p));
        prop_assert!(back.distance(p) < 1e-9);
        let id = pose.compose(&pose.inverse());
        prop_assert!(id.transform_point(p).distance(p) < 1e-9);
    }
}
