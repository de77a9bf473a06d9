use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::matching::{match_nodes, MatchConfig, Matching};
use super::similarity::{semantic_similarity, SimilarityConfig};
use super::{node_metrics, Metrics, MetricsSeries, StepRecord};
use crate::error::{Error, Result};
use crate::graph::{extract_detections, AssociationConfig, GraphBuilder, PredicateConfig, SceneGraph};
use crate::math::Pose;
use crate::planner::{
    generate_candidates, sample_completions, score_candidates, select_nbv, update_coverage, CompletionPrior, CoverageMap,
    PlannerConfig, Viewpoint,
};
use crate::rng::{stream, Purpose};
use crate::sensing::{anchor_frame, backproject, degrade_to_estimate, render_observation, NoiseConfig, RayGrid};
use crate::world::{ground_truth_graph, Cell, Intrinsics, WorldSpec};

/// View ids of external cameras start here; robot views use their step index.
const EXTERNAL_VIEW_BASE: u32 = 1_000_000;

/// Everything that shapes one run besides the world, the seed and the condition flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub noise: NoiseConfig,
    pub association: AssociationConfig,
    pub predicates: PredicateConfig,
    pub similarity: SimilarityConfig,
    pub matching: MatchConfig,
    /// Ray grid of the simulated sensor.
    pub sensing_grid: RayGrid,
    pub planner: PlannerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            noise: NoiseConfig::default(),
            association: AssociationConfig::default(),
            predicates: PredicateConfig::default(),
            similarity: SimilarityConfig::default(),
            matching: MatchConfig::default(),
            sensing_grid: RayGrid::default(),
            planner: PlannerConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.association.validate()?;
        self.predicates.validate()?;
        self.similarity.validate()?;
        self.matching.validate()?;
        if self.sensing_grid.is_empty() {
            return Err(Error::InvalidConfig(String::from("sensing_grid must have at least one ray")));
        }
        self.planner.validate()
    }
}

/// Perception state of one run: observes views, grows the graph and the coverage map,
/// and evaluates against ground truth.
pub struct Pipeline<'a> {
    world: &'a WorldSpec,
    cfg: &'a PipelineConfig,
    seed: u64,
    anchor: Pose,
    builder: GraphBuilder,
    coverage: CoverageMap,
    vocabulary: Vec<String>,
    gt: SceneGraph,
    /// Most rays any single view put on each ground-truth object.
    best_rays: BTreeMap<usize, usize>,
}

impl<'a> Pipeline<'a> {
    /// `anchor` is the known world pose of the reference view.
    pub fn new(world: &'a WorldSpec, cfg: &'a PipelineConfig, anchor: Pose, seed: u64) -> Self {
        Self {
            world,
            cfg,
            seed,
            anchor,
            builder: GraphBuilder::new(cfg.association, cfg.predicates),
            coverage: CoverageMap::for_world(world, cfg.planner.voxel),
            vocabulary: world.label_vocabulary(),
            gt: ground_truth_graph(world, &cfg.predicates),
            best_rays: BTreeMap::new(),
        }
    }

    /// Renders, degrades, anchors and back-projects one view, then folds its detections
    /// into the graph and its rays into the coverage map. Returns the detection count.
    pub fn observe(&mut self, pose: &Pose, intrinsics: &Intrinsics, view: u32, step: u32) -> usize {
        let frame = render_observation(self.world, pose, intrinsics, self.cfg.sensing_grid, view);
        for (obj, n) in frame.rays_per_object() {
            let best = self.best_rays.entry(obj).or_insert(0);
            *best = (*best).max(n);
        }
        let mut rng = stream(self.seed, Purpose::Degrade, view as u64);
        let est = degrade_to_estimate(&frame, &self.anchor, &self.cfg.noise, &mut rng);
        let est = anchor_frame(alloc::vec![est], &self.anchor).expect("one estimate").remove(0);
        let cloud = backproject(&est, &frame);
        let mut rng = stream(self.seed, Purpose::Detections, view as u64);
        let detections = extract_detections(&cloud, self.cfg.association.min_points, &self.cfg.noise, &self.vocabulary, &mut rng);
        self.builder.set_step(step);
        let sim = &self.cfg.similarity;
        self.builder.integrate(&detections, &|a: &str, b: &str| semantic_similarity(a, b, sim));
        update_coverage(&mut self.coverage, &frame, pose, self.cfg.planner.max_range);
        detections.len()
    }

    pub fn observe_external(&mut self, camera: usize, step: u32) -> usize {
        let cam = &self.world.external_cameras()[camera];
        let (pose, intr) = (cam.pose, cam.intrinsics);
        self.observe(&pose, &intr, EXTERNAL_VIEW_BASE + camera as u32, step)
    }

    pub fn graph(&self) -> &SceneGraph {
        self.builder.graph()
    }

    pub fn coverage(&self) -> &CoverageMap {
        &self.coverage
    }

    pub fn ground_truth(&self) -> &SceneGraph {
        &self.gt
    }

    /// Ground-truth objects that received at least `min_points` rays in some single view.
    pub fn visible_objects(&self) -> BTreeSet<usize> {
        let min = self.cfg.association.min_points;
        self.best_rays.iter().filter(|(_, n)| **n >= min).map(|(o, _)| *o).collect()
    }

    pub fn matching(&self) -> Matching {
        match_nodes(self.graph(), &self.gt, &self.cfg.similarity, &self.cfg.matching)
    }

    pub fn metrics(&self) -> Metrics {
        node_metrics(&self.matching(), self.graph(), &self.gt)
    }

    /// Metrics against the ground truth restricted to [`Self::visible_objects`].
    pub fn visible_metrics(&self) -> Metrics {
        let visible = self.visible_objects();
        let mut gt = self.gt.clone();
        let ids: BTreeSet<&str> = visible.iter().map(|&i| self.world.objects()[i].id.as_str()).collect();
        gt.nodes.retain(|id, _| ids.contains(id.as_str()));
        gt.edges.retain(|e| ids.contains(e.src.as_str()) && ids.contains(e.dst.as_str()));
        let m = match_nodes(self.graph(), &gt, &self.cfg.similarity, &self.cfg.matching);
        node_metrics(&m, self.graph(), &gt)
    }

    pub fn into_graph(self) -> SceneGraph {
        self.builder.into_graph()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticRun {
    pub graph: SceneGraph,
    pub metrics: Metrics,
    pub visible: BTreeSet<usize>,
}

/// Builds a graph from fixed external cameras only, all at step 0. The first camera
/// of the subset is the reference view.
pub fn run_static_cpm(world: &WorldSpec, cameras: &[usize], cfg: &PipelineConfig, seed: u64) -> Result<StaticRun> {
    let first = *cameras.first().ok_or(Error::EmptyViews)?;
    let n = world.external_cameras().len();
    if let Some(bad) = cameras.iter().find(|&&c| c >= n) {
        return Err(Error::InvalidConfig(format!("camera index {bad} out of range (world has {n})")));
    }
    let mut p = Pipeline::new(world, cfg, world.external_cameras()[first].pose, seed);
    for &c in cameras {
        p.observe_external(c, 0);
    }
    let metrics = p.metrics();
    let visible = p.visible_objects();
    Ok(StaticRun { graph: p.into_graph(), metrics, visible })
}

/// Viewpoint selection rule of an exploration run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    InfoGain,
    /// Uniformly random unvisited candidate.
    Random,
}

/// Seeded start cell and yaw bin on the navigable grid.
pub fn start_pose(world: &WorldSpec, cfg: &PlannerConfig, seed: u64) -> (Cell, u32) {
    let mut rng = stream(seed, Purpose::Candidate, 0);
    let cells: Vec<Cell> = world.navigable().navigable_cells().collect();
    let cell = cells[rng.random_range(0..cells.len())];
    (cell, rng.random_range(0..cfg.yaw_bins))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub series: MetricsSeries,
    pub graph: SceneGraph,
}

/// Exploration loop. Step 0 observes the CPM cameras (when any are given) and then the
/// start view; each later step scores candidates, moves to the selected viewpoint and
/// observes. `on_step` sees every record with the graph as of that step.
#[allow(clippy::too_many_arguments)]
pub fn run_exploration(
    world: &WorldSpec,
    start: (Cell, u32),
    steps: u32,
    cpm_cameras: &[usize],
    strategy: Strategy,
    prior: &CompletionPrior,
    cfg: &PipelineConfig,
    seed: u64,
    on_step: &mut dyn FnMut(&StepRecord, &SceneGraph),
) -> Result<Exploration> {
    let nav = world.navigable();
    if !nav.is_navigable(start.0) || start.1 >= cfg.planner.yaw_bins {
        return Err(Error::StartOffGrid);
    }
    let n_cams = world.external_cameras().len();
    if let Some(bad) = cpm_cameras.iter().find(|&&c| c >= n_cams) {
        return Err(Error::InvalidConfig(format!("camera index {bad} out of range (world has {n_cams})")));
    }
    let pcfg = &cfg.planner;
    let start_vp = Viewpoint::new(nav, start.0, start.1, pcfg, world.floor_z(), 0);
    let anchor = match cpm_cameras.first() {
        Some(&c) => world.external_cameras()[c].pose,
        None => start_vp.pose(pcfg),
    };
    let mut p = Pipeline::new(world, cfg, anchor, seed);
    for &c in cpm_cameras {
        p.observe_external(c, 0);
    }
    p.observe(&start_vp.pose(pcfg), &pcfg.intrinsics, 0, 0);

    let mut series = MetricsSeries::default();
    let record = |step: u32, vp: Viewpoint, gain: Option<f64>, p: &Pipeline| StepRecord {
        step,
        nodes: p.graph().nodes.len(),
        metrics: p.metrics(),
        viewpoint: Some(vp),
        gain,
    };
    let r = record(0, start_vp, None, &p);
    on_step(&r, p.graph());
    series.steps.push(r);

    let mut visited = BTreeSet::from([start_vp.key()]);
    let mut current = start_vp;
    let empty = SceneGraph::default();
    for step in 1..=steps {
        let candidates = match generate_candidates(p.coverage(), nav, current.cell, pcfg) {
            Ok(c) => c,
            Err(e) => {
                series.terminated = Some(format!("step {step}: {e}"));
                break;
            }
        };
        let candidates: Vec<Viewpoint> = candidates.into_iter().filter(|v| !visited.contains(&v.key())).collect();
        if candidates.is_empty() {
            series.terminated = Some(format!("step {step}: every reachable viewpoint was already visited"));
            break;
        }
        let (next, gain) = match strategy {
            Strategy::InfoGain => {
                let (m, r) = (pcfg.samples, pcfg.completion_radius);
                let prior_samples = sample_completions(&empty, p.coverage(), prior, m, r, seed, step as u64);
                let posterior = sample_completions(p.graph(), p.coverage(), prior, m, r, seed, step as u64);
                let results = score_candidates(&candidates, &prior_samples, &posterior, p.coverage(), pcfg);
                let best = select_nbv(&results)?;
                let gain = results.iter().find(|r| r.viewpoint.key() == best.key()).map(|r| r.gain);
                (best, gain)
            }
            Strategy::Random => {
                let mut rng = stream(seed, Purpose::Baseline, step as u64);
                (candidates[rng.random_range(0..candidates.len())], None)
            }
        };
        visited.insert(next.key());
        current = next;
        p.observe(&next.pose(pcfg), &pcfg.intrinsics, step, step);
        let r = record(step, next, gain, &p);
        on_step(&r, p.graph());
        series.steps.push(r);
    }
    Ok(Exploration { series, graph: p.into_graph() })
}
