//! Next-best-view planning: candidate viewpoints, scene-completion sampling over unknown
//! space, per-ray predicted observations and information gain.

mod coverage;
mod prior;

pub use coverage::{bfs_distances, update_coverage, CoverageMap, LabelId, VoxelState};
pub use prior::CompletionPrior;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::OrientedBox;
use crate::graph::SceneGraph;
use crate::math::{log2, Pose, Vec3};
use crate::rng::{substream, Purpose};
use crate::sensing::RayGrid;
use crate::world::generate::robot_intrinsics;
use crate::world::{Cell, Intrinsics, NavGrid, WALL_LABEL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Completion samples per set (M).
    pub samples: usize,
    pub ray_grid: RayGrid,
    pub yaw_bins: u32,
    /// Camera height above the floor, m.
    pub camera_height: f64,
    /// Camera pitch, radians (negative looks down).
    pub pitch: f64,
    pub max_range: f64,
    /// Only every n-th grid cell (in x and y) is a candidate, besides the current cell
    /// and its neighbours.
    pub candidate_stride: usize,
    pub voxel: f64,
    /// Radius within which graph nodes condition a completion, m.
    pub completion_radius: f64,
    pub intrinsics: Intrinsics,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            samples: 32,
            ray_grid: RayGrid::new(16, 12),
            yaw_bins: 8,
            camera_height: 1.25,
            pitch: -0.3,
            max_range: 8.0,
            candidate_stride: 2,
            voxel: 0.25,
            completion_radius: 2.0,
            intrinsics: robot_intrinsics(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(String::from(m)));
        if self.samples == 0 {
            return bad("planner.samples must be at least 1");
        }
        if self.ray_grid.is_empty() {
            return bad("planner.ray_grid must have at least one ray");
        }
        if self.yaw_bins == 0 {
            return bad("planner.yaw_bins must be at least 1");
        }
        if self.candidate_stride == 0 {
            return bad("planner.candidate_stride must be at least 1");
        }
        if !(self.voxel > 0.0) || !(self.max_range > 0.0) || !(self.camera_height > 0.0) || !(self.completion_radius >= 0.0) {
            return bad("planner distances must be positive");
        }
        self.intrinsics.validate()
    }

    pub fn camera_pose(&self, position: Vec3, yaw: f64) -> Pose {
        Pose::from_yaw_pitch(position, yaw, self.pitch)
    }
}

/// A candidate camera placement: a grid cell and a yaw bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewpoint {
    pub cell: Cell,
    pub yaw_bin: u32,
    pub position: Vec3,
    pub yaw: f64,
    /// Grid-path length from the current cell, in cells.
    pub path_len: u32,
}

impl Viewpoint {
    pub fn new(nav: &NavGrid, cell: Cell, yaw_bin: u32, cfg: &PlannerConfig, floor_z: f64, path_len: u32) -> Self {
        let (x, y) = nav.cell_center(cell);
        Self {
            cell,
            yaw_bin,
            position: Vec3::new(x, y, floor_z + cfg.camera_height),
            yaw: 2.0 * PI * yaw_bin as f64 / cfg.yaw_bins as f64,
            path_len,
        }
    }

    pub fn key(&self) -> (i32, i32, u32) {
        (self.cell.0, self.cell.1, self.yaw_bin)
    }

    pub fn pose(&self, cfg: &PlannerConfig) -> Pose {
        cfg.camera_pose(self.position, self.yaw)
    }
}

/// Navigable cells reachable from `current` through cells whose column is known free,
/// crossed with every yaw bin. The navigable neighbours of `current` are always included so
/// that a robot in unexplored space can still move.
pub fn generate_candidates(cov: &CoverageMap, nav: &NavGrid, current: Cell, cfg: &PlannerConfig) -> Result<Vec<Viewpoint>> {
    let floor_z = cov.origin().z;
    let known_free = |c: Cell| nav.is_navigable(c) && cov.column_known_free(nav, c, cfg.camera_height);
    let dist = bfs_distances(nav, current, known_free);
    let neighbours = [(1, 0), (-1, 0), (0, 1), (0, -1)].map(|(dx, dy)| (current.0 + dx, current.1 + dy));
    let stride = cfg.candidate_stride as i32;
    let mut cells: Vec<(Cell, u32)> = Vec::new();
    for iy in 0..nav.height as i32 {
        for ix in 0..nav.width as i32 {
            let c = (ix, iy);
            if !nav.is_navigable(c) {
                continue;
            }
            let near = c == current || neighbours.contains(&c);
            let d = match dist[iy as usize * nav.width + ix as usize] {
                Some(d) => d,
                None if near && c != current => 1,
                None => continue,
            };
            if near || (ix % stride == 0 && iy % stride == 0) {
                cells.push((c, d));
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(cells
        .into_iter()
        .flat_map(|(c, d)| (0..cfg.yaw_bins).map(move |b| (c, b, d)))
        .map(|(c, b, d)| Viewpoint::new(nav, c, b, cfg, floor_z, d))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub label: String,
    pub bbox: OrientedBox,
    /// Coverage voxels the phantom fills; all were unknown when sampled.
    pub voxels: Vec<usize>,
}

/// One sampled completion of the unobserved scene.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypotheticalWorld {
    /// Labels and boxes of the known graph nodes.
    pub known: Vec<(String, OrientedBox)>,
    pub phantoms: Vec<Phantom>,
}

/// Unknown voxels that can hold the base of an object: on the floor layer or directly
/// above an occupied voxel.
pub fn completion_anchors(cov: &CoverageMap) -> Vec<usize> {
    let [nx, ny, nz] = cov.dims();
    let mut out = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = cov.index([x, y, z]);
                if cov.state(i) != VoxelState::Unknown {
                    continue;
                }
                if z == 0 || matches!(cov.state(cov.index([x, y, z - 1])), VoxelState::Occupied(_)) {
                    out.push(i);
                }
            }
        }
    }
    out
}

/// Voxels whose centers lie inside the axis-aligned box, plus the voxel holding `base`.
fn box_voxels(cov: &CoverageMap, base: [usize; 3], bbox: &OrientedBox) -> Vec<usize> {
    let dims = cov.dims();
    let o = cov.origin();
    let v = cov.voxel_size();
    let range = |a: usize, lo: f64, hi: f64| {
        let first = libm::ceil((lo - o[a]) / v - 0.5).max(0.0) as usize;
        let last = libm::floor((hi - o[a]) / v - 0.5);
        let last = if last < 0.0 { None } else { Some((last as usize).min(dims[a] - 1)) };
        (first, last)
    };
    let (lo, hi) = bbox.aabb();
    let mut out = alloc::vec![cov.index(base)];
    let (x0, x1) = range(0, lo.x, hi.x);
    let (y0, y1) = range(1, lo.y, hi.y);
    let (z0, z1) = range(2, lo.z, hi.z);
    if let (Some(x1), Some(y1), Some(z1)) = (x1, y1, z1) {
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if [x, y, z] != base {
                        out.push(cov.index([x, y, z]));
                    }
                }
            }
        }
    }
    out
}

/// Per-anchor label weights: the prior rates reweighted by co-occurrence with the labels
/// of graph nodes within `radius`. Anchors without known neighbours (or whose neighbours
/// carry no co-occurrence mass) keep the plain rates.
fn conditioned_weights(graph: &SceneGraph, cov: &CoverageMap, prior: &CompletionPrior, anchors: &[usize], radius: f64) -> Vec<Vec<f64>> {
    let nodes: Vec<(Vec3, Option<usize>)> = graph.nodes.values().map(|n| (n.centroid, prior.label_index(&n.label))).collect();
    anchors
        .iter()
        .map(|&a| {
            let c = cov.voxel_center(cov.coords(a));
            let near: Vec<usize> = nodes.iter().filter(|(p, _)| p.distance(c) <= radius).filter_map(|(_, l)| *l).collect();
            let w: Vec<f64> = (0..prior.vocabulary.len())
                .map(|l| prior.occupancy[l] * near.iter().map(|&m| prior.cooccurrence[l][m]).sum::<f64>())
                .collect();
            if w.iter().sum::<f64>() > 0.0 {
                w
            } else {
                prior.occupancy.clone()
            }
        })
        .collect()
}

/// Draws `m` completions conditioned on `graph`. Sample `i` uses the substream
/// `(seed, Completion, step, i)`, and every anchor consumes exactly two draws, so samples
/// drawn with and without conditioning share their random numbers.
pub fn sample_completions(
    graph: &SceneGraph,
    cov: &CoverageMap,
    prior: &CompletionPrior,
    m: usize,
    radius: f64,
    seed: u64,
    step: u64,
) -> Vec<HypotheticalWorld> {
    let anchors = completion_anchors(cov);
    let weights = conditioned_weights(graph, cov, prior, &anchors, radius);
    let p_occupied = prior.occupancy.iter().sum::<f64>().min(1.0);
    let known: Vec<(String, OrientedBox)> = graph.nodes.values().map(|n| (n.label.clone(), n.bbox)).collect();
    let mut taken = alloc::vec![false; cov.len()];
    (0..m)
        .map(|i| {
            let mut rng = substream(seed, Purpose::Completion, step, i as u64);
            let mut phantoms = Vec::new();
            taken.iter_mut().for_each(|t| *t = false);
            for (a, w) in anchors.iter().zip(&weights) {
                let u_occ: f64 = rng.random();
                let u_label: f64 = rng.random();
                if u_occ >= p_occupied || taken[*a] {
                    continue;
                }
                let total: f64 = w.iter().sum();
                let mut acc = 0.0;
                let mut label = w.len() - 1;
                for (l, wl) in w.iter().enumerate() {
                    acc += wl / total;
                    if u_label < acc {
                        label = l;
                        break;
                    }
                }
                let base = cov.coords(*a);
                let center = cov.voxel_center(base);
                let half = prior.half_extents[label];
                let bottom = center.z - cov.voxel_size() / 2.0;
                let bbox = OrientedBox::axis_aligned(Vec3::new(center.x, center.y, bottom + half.z), half);
                let voxels = box_voxels(cov, base, &bbox);
                if voxels.iter().any(|&v| taken[v] || cov.state(v) != VoxelState::Unknown) {
                    continue;
                }
                for &v in &voxels {
                    taken[v] = true;
                }
                phantoms.push(Phantom { label: prior.vocabulary[label].clone(), bbox, voxels });
            }
            HypotheticalWorld { known: known.clone(), phantoms }
        })
        .collect()
}

/// Observation category of one ray.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Empty,
    Wall,
    Label(String),
}

/// Per-ray categorical distribution over outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedObservation {
    /// One sorted list of `(outcome, probability)` per ray.
    pub rays: Vec<Vec<(Outcome, f64)>>,
}

impl PredictedObservation {
    /// Sum of per-ray Shannon entropies, bits.
    pub fn entropy(&self) -> f64 {
        self.rays.iter().map(|r| entropy(r.iter().map(|(_, p)| *p))).sum()
    }
}

pub fn entropy(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs.into_iter().filter(|p| *p > 0.0).map(|p| -p * log2(p)).sum::<f64>().max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoGainResult {
    pub viewpoint: Viewpoint,
    pub h_prior: f64,
    pub h_posterior: f64,
    /// `h_prior - h_posterior`; may be slightly negative from sampling noise.
    pub gain: f64,
}

const EMPTY: u16 = 0;
const WALL: u16 = 1;

/// Dense outcome codes shared by the coverage labels and phantom labels.
struct Codes {
    labels: BTreeMap<String, u16>,
    names: Vec<String>,
}

impl Codes {
    fn new() -> Self {
        Self { labels: BTreeMap::new(), names: Vec::new() }
    }

    fn code(&mut self, label: &str) -> u16 {
        if label == WALL_LABEL {
            return WALL;
        }
        if let Some(&c) = self.labels.get(label) {
            return c;
        }
        let c = 2 + self.names.len() as u16;
        self.labels.insert(String::from(label), c);
        self.names.push(String::from(label));
        c
    }

    fn outcome(&self, code: u16) -> Outcome {
        match code {
            EMPTY => Outcome::Empty,
            WALL => Outcome::Wall,
            c => Outcome::Label(self.names[(c - 2) as usize].clone()),
        }
    }
}

/// Unknown voxels a ray crosses before its first occupied voxel, and what ends it.
struct RayPath {
    unknown: Vec<u32>,
    terminal: u16,
}

fn ray_paths(cov: &CoverageMap, codes: &mut Codes, x: &Viewpoint, cfg: &PlannerConfig) -> Vec<RayPath> {
    let pose = x.pose(cfg);
    cfg.ray_grid
        .ray_directions(&cfg.intrinsics)
        .into_iter()
        .map(|d| {
            let dir = pose.transform_vector(d);
            let mut unknown = Vec::new();
            let mut terminal = None;
            cov.traverse(pose.translation, dir, cfg.max_range, |idx, _, _| match cov.state(idx) {
                VoxelState::Unknown => {
                    unknown.push(idx as u32);
                    true
                }
                VoxelState::Free => true,
                VoxelState::Occupied(l) => {
                    terminal = Some(l);
                    false
                }
            });
            let terminal = terminal.map_or(EMPTY, |l| codes.code(cov.label(l)));
            RayPath { unknown, terminal }
        })
        .collect()
}

/// Dense per-voxel phantom code for each sample (0 where no phantom).
fn overlays(cov: &CoverageMap, codes: &mut Codes, samples: &[HypotheticalWorld]) -> Vec<Vec<u16>> {
    samples
        .iter()
        .map(|s| {
            let mut grid = alloc::vec![EMPTY; cov.len()];
            for p in &s.phantoms {
                let c = codes.code(&p.label);
                for &v in &p.voxels {
                    grid[v] = c;
                }
            }
            grid
        })
        .collect()
}

/// Per-ray outcome counts across samples, as sorted `(code, count)` lists.
fn ray_counts(paths: &[RayPath], overlays: &[Vec<u16>]) -> Vec<Vec<(u16, u32)>> {
    let mut scratch = Vec::with_capacity(overlays.len());
    paths
        .iter()
        .map(|path| {
            scratch.clear();
            for grid in overlays {
                let hit = path.unknown.iter().map(|&v| grid[v as usize]).find(|&c| c != EMPTY);
                scratch.push(hit.unwrap_or(path.terminal));
            }
            scratch.sort_unstable();
            let mut counts: Vec<(u16, u32)> = Vec::new();
            for &c in &scratch {
                match counts.last_mut() {
                    Some((last, n)) if *last == c => *n += 1,
                    _ => counts.push((c, 1)),
                }
            }
            counts
        })
        .collect()
}

fn counts_entropy(counts: &[Vec<(u16, u32)>], m: usize) -> f64 {
    counts.iter().map(|r| entropy(r.iter().map(|&(_, n)| n as f64 / m as f64))).sum()
}

/// Renders the planning ray grid from `x` against every sample and returns each ray's
/// empirical outcome distribution. Rays resolve against the coverage map: a phantom on
/// a ray's unknown stretch wins, otherwise the first occupied voxel (or nothing).
pub fn predicted_distribution(x: &Viewpoint, samples: &[HypotheticalWorld], cov: &CoverageMap, cfg: &PlannerConfig) -> PredictedObservation {
    let mut codes = Codes::new();
    let paths = ray_paths(cov, &mut codes, x, cfg);
    let grids = overlays(cov, &mut codes, samples);
    let m = samples.len().max(1) as f64;
    let rays = ray_counts(&paths, &grids)
        .into_iter()
        .map(|r| {
            let mut v: Vec<(Outcome, f64)> = r.into_iter().map(|(c, n)| (codes.outcome(c), n as f64 / m)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        })
        .collect();
    PredictedObservation { rays }
}

/// Information gain of every candidate: entropy of the predicted observation under
/// unconditioned samples minus that under graph-conditioned samples, summed over rays.
pub fn score_candidates(
    candidates: &[Viewpoint],
    prior_samples: &[HypotheticalWorld],
    posterior_samples: &[HypotheticalWorld],
    cov: &CoverageMap,
    cfg: &PlannerConfig,
) -> Vec<InfoGainResult> {
    let mut codes = Codes::new();
    let prior_grids = overlays(cov, &mut codes, prior_samples);
    let post_grids = overlays(cov, &mut codes, posterior_samples);
    candidates
        .iter()
        .map(|x| {
            let paths = ray_paths(cov, &mut codes, x, cfg);
            let h_prior = counts_entropy(&ray_counts(&paths, &prior_grids), prior_samples.len());
            let h_posterior = counts_entropy(&ray_counts(&paths, &post_grids), posterior_samples.len());
            InfoGainResult { viewpoint: *x, h_prior, h_posterior, gain: h_prior - h_posterior }
        })
        .collect()
}

pub fn info_gain(
    x: &Viewpoint,
    prior_samples: &[HypotheticalWorld],
    posterior_samples: &[HypotheticalWorld],
    cov: &CoverageMap,
    cfg: &PlannerConfig,
) -> InfoGainResult {
    score_candidates(core::slice::from_ref(x), prior_samples, posterior_samples, cov, cfg)[0]
}

/// Highest gain (negative gains count as 0), then shorter path, then smaller viewpoint key.
pub fn select_nbv(results: &[InfoGainResult]) -> Result<Viewpoint> {
    results
        .iter()
        .min_by(|a, b| {
            b.gain
                .max(0.0)
                .total_cmp(&a.gain.max(0.0))
                .then(a.viewpoint.path_len.cmp(&b.viewpoint.path_len))
                .then(a.viewpoint.key().cmp(&b.viewpoint.key()))
        })
        .map(|r| r.viewpoint)
        .ok_or(Error::EmptyResults)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ObjectNode;
    use crate::geometry::obb_corners;

    fn open_nav(n: usize) -> NavGrid {
        let mut nav = NavGrid::new((0.0, 0.0), 0.25, n, n);
        for y in 0..n as i32 {
            for x in 0..n as i32 {
                nav.set((x, y), true);
            }
        }
        nav
    }

    fn result(cell: Cell, gain: f64, path_len: u32) -> InfoGainResult {
        let nav = open_nav(8);
        let vp = Viewpoint::new(&nav, cell, 0, &PlannerConfig::default(), 0.0, path_len);
        InfoGainResult { viewpoint: vp, h_prior: gain.max(0.0), h_posterior: 0.0, gain }
    }

    #[test]
    fn unknown_map_gives_only_adjacent_candidates() {
        let nav = open_nav(8);
        let cov = CoverageMap::new(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.5), 0.25);
        let cfg = PlannerConfig::default();
        let c = generate_candidates(&cov, &nav, (3, 3), &cfg).unwrap();
        assert_eq!(c.len(), 5 * 8);
        assert!(c.iter().all(|v| (v.cell.0 - 3).abs() + (v.cell.1 - 3).abs() <= 1));
    }

    #[test]
    fn explored_map_gives_every_cell() {
        let nav = open_nav(8);
        let mut cov = CoverageMap::new(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.5), 0.25);
        for i in 0..cov.len() {
            cov.set_state(i, VoxelState::Free);
        }
        let cfg = PlannerConfig { candidate_stride: 1, ..Default::default() };
        let c = generate_candidates(&cov, &nav, (0, 0), &cfg).unwrap();
        assert_eq!(c.len(), 64 * 8);
    }

    #[test]
    fn selection_rules() {
        let a = result((1, 1), 0.5, 1);
        let b = result((2, 2), 2.0, 4);
        let c = result((3, 3), 1.0, 1);
        assert_eq!(select_nbv(&[a, b, c]).unwrap(), b.viewpoint);
        assert_eq!(select_nbv(&[a]).unwrap(), a.viewpoint);
        // ties on gain fall back to the shorter path
        let d = result((4, 4), 2.0, 2);
        assert_eq!(select_nbv(&[a, b, c, d]).unwrap(), d.viewpoint);
        // negative gains are treated as zero
        let e = result((0, 1), -0.3, 0);
        let f = result((0, 2), 0.0, 0);
        assert_eq!(select_nbv(&[f, e]).unwrap(), e.viewpoint);
        assert!(matches!(select_nbv(&[]), Err(Error::EmptyResults)));
    }

    #[test]
    fn degenerate_prior_only_yields_its_label() {
        let cov = CoverageMap::new(Vec3::ZERO, Vec3::new(4.0, 4.0, 2.0), 0.25);
        let prior = CompletionPrior::new(
            alloc::vec!["chair".into(), "lamp".into()],
            alloc::vec![0.3, 0.0],
            alloc::vec![alloc::vec![1.0, 1.0], alloc::vec![1.0, 1.0]],
            alloc::vec![Vec3::new(0.2, 0.2, 0.4); 2],
        )
        .unwrap();
        let samples = sample_completions(&SceneGraph::default(), &cov, &prior, 4, 2.0, 9, 0);
        assert!(samples.iter().all(|s| !s.phantoms.is_empty()));
        assert!(samples.iter().flat_map(|s| &s.phantoms).all(|p| p.label == "chair"));
        assert_eq!(samples, sample_completions(&SceneGraph::default(), &cov, &prior, 4, 2.0, 9, 0));
        for s in &samples {
            let mut seen = alloc::collections::BTreeSet::new();
            for p in &s.phantoms {
                for v in &p.voxels {
                    assert!(seen.insert(*v), "phantoms overlap");
                }
            }
        }
    }

    #[test]
    fn no_unknown_space_means_no_phantoms() {
        let mut cov = CoverageMap::new(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.0), 0.25);
        for i in 0..cov.len() {
            cov.set_state(i, VoxelState::Free);
        }
        let prior = CompletionPrior::uniform(&["chair".into()], 0.5, Vec3::new(0.1, 0.1, 0.1));
        let b = OrientedBox::axis_aligned(Vec3::new(1.0, 1.0, 0.5), Vec3::new(0.2, 0.2, 0.5));
        let mut g = SceneGraph::default();
        g.nodes.insert("n0".into(), ObjectNode::from_points("n0".into(), "table", obb_corners(&b).to_vec(), Some(b), 0));
        for s in sample_completions(&g, &cov, &prior, 3, 2.0, 1, 0) {
            assert!(s.phantoms.is_empty());
            assert_eq!(s.known, alloc::vec![(String::from("table"), b)]);
        }
    }

    #[test]
    fn identical_samples_have_zero_entropy() {
        let cov = CoverageMap::new(Vec3::ZERO, Vec3::new(4.0, 4.0, 2.0), 0.25);
        let nav = open_nav(16);
        let cfg = PlannerConfig::default();
        let prior = CompletionPrior::uniform(&["chair".into(), "lamp".into()], 0.2, Vec3::new(0.1, 0.1, 0.1));
        let one = sample_completions(&SceneGraph::default(), &cov, &prior, 1, 2.0, 3, 0);
        let many: Vec<HypotheticalWorld> = (0..5).map(|_| one[0].clone()).collect();
        let x = Viewpoint::new(&nav, (8, 8), 0, &cfg, 0.0, 0);
        let obs = predicted_distribution(&x, &many, &cov, &cfg);
        for r in &obs.rays {
            assert_eq!(r.len(), 1);
            assert_eq!(r[0].1, 1.0);
        }
        let spread = sample_completions(&SceneGraph::default(), &cov, &prior, 16, 2.0, 3, 0);
        let g = info_gain(&x, &spread, &many, &cov, &cfg);
        assert_eq!(g.h_posterior, 0.0);
        assert!(g.gain >= 0.0 && g.gain == g.h_prior);
    }
}
