//! Executes an [`ExperimentConfig`] and writes its outputs:
//!
//! - `metrics.csv`: one row per (scene, seed, step)
//! - `summary.csv`: mean and sample standard deviation across runs per step
//! - `snapshots/<scene>_seed<seed>_step<step>.json`: graph after each step
//! - `manifest.json`: the resolved configuration and per-run outcomes
//!
//! Outputs are assembled in a sibling directory and renamed into place once complete, so a
//! failed run leaves nothing behind.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use activesg_core::eval::{
    aggregate, edge_metrics, match_nodes, run_exploration, run_static_cpm, start_pose, Metrics, PipelineConfig, StepRecord,
};
use activesg_core::graph::SceneGraph;
use activesg_core::math::Vec3;
use activesg_core::planner::CompletionPrior;
use activesg_core::world::generate::{generate, Family};
use activesg_core::world::{ground_truth_graph, WorldSpec};
use anyhow::Context;
use serde_json::json;

use crate::config::{ExperimentConfig, Mode, PriorSource, StrategyName, WorldSource};
use crate::error::{CliError, FileError};
use crate::scene::load_scene;
use crate::snapshot::graph_to_string;
use crate::tables::load_prior;

/// Generator seeds used to estimate a family prior. Disjoint from the small seeds used
/// for benchmark worlds.
pub const PRIOR_SEEDS: std::ops::Range<u64> = 10_000..10_008;

/// Total anchor occupancy rate and shared size of the built-in uniform prior.
const UNIFORM_RATE: f64 = 0.05;
const UNIFORM_HALF: f64 = 0.3;

pub const METRICS_HEADER: &str = "scene,seed,step,nodes_pred,precision,recall,f1,gain_selected";

/// Empirical completion prior of a generator family.
pub fn family_prior(family: Family, voxel: f64, radius: f64) -> activesg_core::Result<CompletionPrior> {
    let worlds = PRIOR_SEEDS.map(|s| generate(family, s)).collect::<activesg_core::Result<Vec<_>>>()?;
    CompletionPrior::from_worlds(&worlds, voxel, radius)
}

#[derive(Debug, Clone)]
pub struct NamedWorld {
    pub name: String,
    pub world: WorldSpec,
}

/// Loads or generates every configured world. Names are file stems or `<family>-<seed>`,
/// made unique with a numeric suffix.
pub fn load_worlds(cfg: &ExperimentConfig) -> Result<Vec<NamedWorld>, CliError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |name: String, world: WorldSpec| {
        let clean: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
        let mut unique = clean.clone();
        let mut k = 1;
        while !seen.insert(unique.clone()) {
            unique = format!("{clean}-{k}");
            k += 1;
        }
        out.push(NamedWorld { name: unique, world });
    };
    for w in &cfg.worlds {
        match w {
            WorldSource::File { path } => {
                let stem = path.file_stem().map_or_else(|| "scene".into(), |s| s.to_string_lossy().into_owned());
                push(stem, load_scene(path)?);
            }
            WorldSource::Generated { family, seed, count } => {
                let fam: Family = family.parse().map_err(|e: activesg_core::Error| CliError::Usage(e.to_string()))?;
                for s in *seed..seed + count {
                    let world = generate(fam, s).with_context(|| format!("generating {fam} world {s}"))?;
                    push(format!("{fam}-{s}"), world);
                }
            }
        }
    }
    let c = &cfg.conditions;
    let uses_cameras = c.mode == Mode::Static || c.cpm_enabled;
    for w in out.iter().filter(|_| uses_cameras) {
        let available = w.world.external_cameras().len();
        if let Some(bad) = c.cameras.iter().find(|&&i| i >= available) {
            return Err(CliError::Usage(format!("conditions.cameras: camera {bad} does not exist in world `{}` ({available} cameras)", w.name)));
        }
    }
    Ok(out)
}

fn resolve_prior(cfg: &ExperimentConfig, worlds: &[NamedWorld]) -> Result<CompletionPrior, CliError> {
    match &cfg.prior {
        PriorSource::Uniform => {
            let vocab: BTreeSet<String> = worlds.iter().flat_map(|w| w.world.label_vocabulary()).collect();
            let vocab: Vec<String> = vocab.into_iter().collect();
            Ok(CompletionPrior::uniform(&vocab, UNIFORM_RATE, Vec3::new(UNIFORM_HALF, UNIFORM_HALF, UNIFORM_HALF)))
        }
        PriorSource::Family(f) => {
            let fam: Family = f.parse().map_err(|e: activesg_core::Error| CliError::Usage(e.to_string()))?;
            Ok(family_prior(fam, cfg.planner.voxel, cfg.planner.completion_radius).context("estimating family prior")?)
        }
        PriorSource::Path(p) => Ok(load_prior(p)?),
    }
}

/// Outcome of one (scene, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scene: String,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    /// Serialized graph after each step, in step order.
    pub snapshots: Vec<(u32, String)>,
    pub terminated: Option<String>,
    pub edges: Metrics,
}

fn final_edges(world: &WorldSpec, graph: &SceneGraph, cfg: &PipelineConfig) -> Metrics {
    let gt = ground_truth_graph(world, &cfg.predicates);
    let m = match_nodes(graph, &gt, &cfg.similarity, &cfg.matching);
    edge_metrics(&m, graph, &gt)
}

/// Runs one (world, seed) pair under the configured condition.
pub fn run_one(
    cfg: &ExperimentConfig,
    pipeline: &PipelineConfig,
    prior: &CompletionPrior,
    world: &NamedWorld,
    seed: u64,
) -> anyhow::Result<RunResult> {
    let c = &cfg.conditions;
    let w = &world.world;
    let context = || format!("scene {} seed {seed}", world.name);
    match c.mode {
        Mode::Static => {
            let run = run_static_cpm(w, &c.cameras, pipeline, seed).with_context(context)?;
            let mut graph = run.graph;
            graph.step = 0;
            let record = StepRecord { step: 0, nodes: graph.nodes.len(), metrics: run.metrics, viewpoint: None, gain: None };
            Ok(RunResult {
                scene: world.name.clone(),
                seed,
                steps: vec![record],
                snapshots: vec![(0, graph_to_string(&graph))],
                terminated: None,
                edges: final_edges(w, &graph, pipeline),
            })
        }
        Mode::Exploration => {
            let start = start_pose(w, &pipeline.planner, seed);
            let cams: &[usize] = if c.cpm_enabled { &c.cameras } else { &[] };
            let mut snapshots = Vec::new();
            let exploration = run_exploration(
                w,
                start,
                cfg.planner.steps,
                cams,
                c.strategy.into(),
                prior,
                pipeline,
                seed,
                &mut |r, g| snapshots.push((r.step, graph_to_string(g))),
            )
            .with_context(context)?;
            Ok(RunResult {
                scene: world.name.clone(),
                seed,
                edges: final_edges(w, &exploration.graph, pipeline),
                steps: exploration.series.steps,
                snapshots,
                terminated: exploration.series.terminated,
            })
        }
    }
}

/// Runs every (world, repeat) pair on up to `jobs` threads. Results come back in
/// configuration order regardless of scheduling.
pub fn run_all(cfg: &ExperimentConfig, origin: &Path, jobs: usize) -> Result<Vec<RunResult>, CliError> {
    let pipeline = cfg.pipeline(origin)?;
    let worlds = load_worlds(cfg)?;
    let needs_prior = cfg.conditions.mode == Mode::Exploration && cfg.conditions.strategy == StrategyName::InfoGain;
    let prior = if needs_prior { resolve_prior(cfg, &worlds)? } else { CompletionPrior::uniform(&[], 0.0, Vec3::new(0.1, 0.1, 0.1)) };
    let tasks: Vec<(usize, u64)> =
        (0..worlds.len()).flat_map(|w| (0..cfg.repeats).map(move |r| (w, cfg.seed.wrapping_add(r)))).collect();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, tasks.len().max(1)) {
            let tx = tx.clone();
            let (tasks, next, worlds, pipeline, prior) = (&tasks, &next, &worlds, &pipeline, &prior);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(w, seed)) = tasks.get(i) else { break };
                log::info!("running {} seed {seed}", worlds[w].name);
                let r = run_one(cfg, pipeline, prior, &worlds[w], seed);
                let failed = r.is_err();
                if tx.send((i, r)).is_err() || failed {
                    // stop picking up work after a failure
                    next.store(tasks.len(), Ordering::Relaxed);
                }
            });
        }
    });
    drop(tx);
    let mut results: Vec<(usize, anyhow::Result<RunResult>)> = rx.into_iter().collect();
    results.sort_by_key(|(i, _)| *i);
    let mut out = Vec::with_capacity(results.len());
    for (_, r) in results {
        out.push(r?);
    }
    Ok(out)
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn metrics_csv(results: &[RunResult]) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for r in results {
        for st in &r.steps {
            let m = &st.metrics;
            let gain = st.gain.map(num).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{},{},{},{}", r.scene, r.seed, st.step, st.nodes, num(m.precision), num(m.recall), num(m.f1), gain);
        }
    }
    s
}

/// Per-step mean and sample standard deviation across runs. Runs that stopped early
/// contribute only the steps they reached.
pub fn summary_csv(results: &[RunResult]) -> String {
    let mut s = String::from("step,runs,nodes_pred_mean,nodes_pred_std,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n");
    let last = results.iter().flat_map(|r| r.steps.iter().map(|s| s.step)).max();
    for step in 0..=last.unwrap_or(0) {
        let rows: Vec<&StepRecord> = results.iter().filter_map(|r| r.steps.iter().find(|s| s.step == step)).collect();
        if rows.is_empty() {
            continue;
        }
        let col = |f: &dyn Fn(&StepRecord) -> f64| aggregate(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
        let cols = [
            col(&|r| r.nodes as f64),
            col(&|r| r.metrics.precision),
            col(&|r| r.metrics.recall),
            col(&|r| r.metrics.f1),
        ];
        let _ = write!(s, "{step},{}", rows.len());
        for (m, sd) in cols {
            let _ = write!(s, ",{},{}", num(m), num(sd));
        }
        s.push('\n');
    }
    s
}

pub fn manifest(cfg: &ExperimentConfig, results: &[RunResult]) -> String {
    let runs: Vec<_> = results
        .iter()
        .map(|r| {
            let last = r.steps.last().map(|s| s.metrics).unwrap_or_default();
            json!({
                "scene": r.scene,
                "seed": r.seed,
                "steps": r.steps.len(),
                "terminated": r.terminated,
                "final_nodes": {"precision": last.precision, "recall": last.recall, "f1": last.f1},
                "final_edges": {"precision": r.edges.precision, "recall": r.edges.recall, "f1": r.edges.f1},
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({"config": cfg, "runs": runs})).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn snapshot_name(scene: &str, seed: u64, step: u32) -> String {
    format!("{scene}_seed{seed}_step{step:03}.json")
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, results: &[RunResult]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir.join("snapshots"))?;
    std::fs::write(dir.join("metrics.csv"), metrics_csv(results))?;
    std::fs::write(dir.join("summary.csv"), summary_csv(results))?;
    for r in results {
        for (step, text) in &r.snapshots {
            std::fs::write(dir.join("snapshots").join(snapshot_name(&r.scene, r.seed, *step)), text)?;
        }
    }
    std::fs::write(dir.join("manifest.json"), manifest(cfg, results))
}

/// Runs the experiment and publishes its outputs at `cfg.output_dir`. An existing output
/// directory is replaced only if it holds a previous run (has a `manifest.json`).
pub fn run_experiment(cfg: &ExperimentConfig, origin: &Path, jobs: usize) -> Result<PathBuf, CliError> {
    let out = cfg.output_dir.clone();
    if out.exists() && !out.join("manifest.json").is_file() {
        return Err(FileError::invalid(&out, "output directory exists and does not hold a previous run").into());
    }
    let results = run_all(cfg, origin, jobs)?;
    let name = out.file_name().map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
    let staging = out.with_file_name(format!(".{name}.partial"));
    let publish = || -> std::io::Result<()> {
        if staging.exists() {
            std::fs::remove_dir_all(&staging)?;
        }
        write_outputs(&staging, cfg, &results)?;
        if out.exists() {
            std::fs::remove_dir_all(&out)?;
        }
        std::fs::rename(&staging, &out)
    };
    if let Err(e) = publish() {
        let _ = std::fs::remove_dir_all(&staging);
        return Err(anyhow::Error::new(e).context(format!("writing outputs to {}", out.display())).into());
    }
    Ok(out)
}
