use std::path::Path;

use activesg::scene::{parse_scene, scene_to_string};
use activesg::snapshot::{graph_to_string, parse_graph};
use activesg::tables::{parse_prior, prior_to_string};
use activesg::runner::family_prior;
use activesg_core::eval::{run_static_cpm, PipelineConfig};
use activesg_core::graph::PredicateConfig;
use activesg_core::math::Vec3;
use activesg_core::world::generate::{generate, Family};
use activesg_core::world::ground_truth_graph;

#[test]
fn generated_scenes_survive_a_round_trip() {
    for (family, seed) in [(Family::Room, 3), (Family::Apartment, 1)] {
        let world = generate(family, seed).unwrap();
        let text = scene_to_string(&world);
        let back = parse_scene(Path::new("scene.json"), &text).unwrap();
        // camera rotations pass through quaternions, so only they may differ in the last bits
        assert_eq!(back.objects(), world.objects());
        assert_eq!(back.walls(), world.walls());
        assert_eq!(back.navigable(), world.navigable());
        assert_eq!(back.external_cameras().len(), world.external_cameras().len());
        for (a, b) in back.external_cameras().iter().zip(world.external_cameras()) {
            assert_eq!(a.intrinsics, b.intrinsics);
            for p in [Vec3::ZERO, Vec3::new(1.0, 2.0, 3.0), Vec3::new(-4.0, 0.5, 1.0)] {
                assert!(a.pose.transform_point(p).distance(b.pose.transform_point(p)) < 1e-9);
            }
        }
        let cfg = PredicateConfig::default();
        assert_eq!(ground_truth_graph(&back, &cfg), ground_truth_graph(&world, &cfg));
    }
}

#[test]
fn run_snapshots_survive_a_round_trip() {
    let world = generate(Family::Room, 2).unwrap();
    let run = run_static_cpm(&world, &[0, 1], &PipelineConfig::default(), 2).unwrap();
    let text = graph_to_string(&run.graph);
    let back = parse_graph(Path::new("g.json"), &text).unwrap();
    assert_eq!(graph_to_string(&back), text);
    assert_eq!(back.edges, run.graph.edges);
    assert_eq!(back.step, run.graph.step);
    for (a, b) in back.nodes.values().zip(run.graph.nodes.values()) {
        assert_eq!((&a.id, &a.label, &a.histogram), (&b.id, &b.label, &b.histogram));
        assert_eq!((a.bbox, a.centroid, a.point_count), (b.bbox, b.centroid, b.point_count));
        assert_eq!((a.first_step, a.last_step), (b.first_step, b.last_step));
    }
    assert_eq!(back.nodes.len(), run.graph.nodes.len());
}

#[test]
fn family_priors_survive_a_round_trip() {
    let prior = family_prior(Family::Room, 0.25, 1.5).unwrap();
    let text = prior_to_string(&prior);
    let back = parse_prior(Path::new("prior.json"), &text).unwrap();
    assert_eq!(prior_to_string(&back), text);
}

