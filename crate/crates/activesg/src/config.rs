//! Experiment configuration files.
//!
//! Only `seed` and `worlds` are required; every other section falls back to the library
//! defaults. Relative paths inside the file are resolved against the file's directory.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "repeats": 1,
//!   "worlds": [{"path": "scene.json"}, {"family": "room", "seed": 3, "count": 5}],
//!   "conditions": {"mode": "exploration", "cpm_enabled": true, "cameras": [0],
//!                  "strategy": "info_gain", "oracle_association": false, "zero_noise": false},
//!   "noise": {"depth_rel": 0.02, "translation": 0.02, "rotation_deg": 0.5, "log_scale": 0.02,
//!             "label_flip_prob": 0.05, "world_scale": 1.0},
//!   "predicates": {"contact_gap": 0.05, "vertical_gap_max": 0.5, "overlap_min": 0.3,
//!                  "inside_min": 0.9, "near_gap": 0.3, "height_similarity": 0.3},
//!   "association": {"geometric_weight": 0.6, "semantic_weight": 0.4, "threshold": 0.5, "min_points": 5},
//!   "similarity": {"mode": "exact", "tau_sem": 0.75},
//!   "matching": {"tau_geo": 1.0},
//!   "prior": "uniform",
//!   "planner": {"steps": 30, "samples": 32, "ray_cols": 16, "ray_rows": 12, "yaw_bins": 8},
//!   "sensing": {"cols": 64, "rows": 48},
//!   "output_dir": "out"
//! }
//! ```
//!
//! `similarity.mode` is `"exact"`, `"synonyms"` or `"embedding"`; the latter two need
//! `similarity.table`. `prior` is `"uniform"`, `{"family": "apartment"}` (estimated from
//! generated worlds of that family) or `{"path": "prior.json"}`.

use std::path::{Path, PathBuf};

use activesg_core::eval::{MatchConfig, PipelineConfig, SimilarityConfig, SimilarityMode, Strategy};
use activesg_core::graph::{AssociationConfig, AssociationMode, PredicateConfig};
use activesg_core::planner::PlannerConfig;
use activesg_core::sensing::{NoiseConfig, RayGrid};
use activesg_core::world::generate::Family;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{parse, parse_value, read, FileError};
use crate::tables::{load_embeddings, load_synonyms};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WorldSource {
    File { path: PathBuf },
    Generated { family: String, seed: u64, #[serde(default = "one")] count: u64 },
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Static,
    #[default]
    Exploration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    #[default]
    InfoGain,
    Random,
}

impl From<StrategyName> for Strategy {
    fn from(s: StrategyName) -> Self {
        match s {
            StrategyName::InfoGain => Strategy::InfoGain,
            StrategyName::Random => Strategy::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Conditions {
    pub mode: Mode,
    /// Exploration only: observe `cameras` before the first robot view.
    pub cpm_enabled: bool,
    /// External camera indices. Static runs use all of them.
    pub cameras: Vec<usize>,
    pub strategy: StrategyName,
    pub oracle_association: bool,
    pub zero_noise: bool,
}

impl Default for Conditions {
    fn default() -> Self {
        Self {
            mode: Mode::default(),
            cpm_enabled: false,
            cameras: vec![0],
            strategy: StrategyName::default(),
            oracle_association: false,
            zero_noise: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub depth_rel: f64,
    pub translation: f64,
    pub rotation_deg: f64,
    pub log_scale: f64,
    pub label_flip_prob: f64,
    pub world_scale: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        Self {
            depth_rel: n.depth_rel,
            translation: n.translation,
            rotation_deg: n.rotation.to_degrees(),
            log_scale: n.log_scale,
            label_flip_prob: n.label_flip_prob,
            world_scale: n.world_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredicateSection {
    pub contact_gap: f64,
    pub vertical_gap_max: f64,
    pub overlap_min: f64,
    pub inside_min: f64,
    pub near_gap: f64,
    pub height_similarity: f64,
}

impl Default for PredicateSection {
    fn default() -> Self {
        let p = PredicateConfig::default();
        Self {
            contact_gap: p.contact_gap,
            vertical_gap_max: p.vertical_gap_max,
            overlap_min: p.overlap_min,
            inside_min: p.inside_min,
            near_gap: p.near_gap,
            height_similarity: p.height_similarity,
        }
    }
}

impl From<&PredicateSection> for PredicateConfig {
    fn from(p: &PredicateSection) -> Self {
        PredicateConfig {
            contact_gap: p.contact_gap,
            vertical_gap_max: p.vertical_gap_max,
            overlap_min: p.overlap_min,
            inside_min: p.inside_min,
            near_gap: p.near_gap,
            height_similarity: p.height_similarity,
        }
    }
}

/// Predicate thresholds from a file holding just the predicate section.
pub fn load_predicates(path: &Path) -> Result<PredicateConfig, FileError> {
    let s: PredicateSection = parse(path, &read(path)?)?;
    let cfg = PredicateConfig::from(&s);
    cfg.validate().map_err(|e| FileError::invalid(path, e.to_string()))?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationSection {
    pub geometric_weight: f64,
    pub semantic_weight: f64,
    pub threshold: f64,
    pub min_points: usize,
}

impl Default for AssociationSection {
    fn default() -> Self {
        let a = AssociationConfig::default();
        Self { geometric_weight: a.geometric_weight, semantic_weight: a.semantic_weight, threshold: a.threshold, min_points: a.min_points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    #[default]
    Exact,
    Synonyms,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilaritySection {
    pub mode: SimilarityKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    pub tau_sem: f64,
}

impl Default for SimilaritySection {
    fn default() -> Self {
        Self { mode: SimilarityKind::Exact, table: None, tau_sem: SimilarityConfig::default().tau_sem }
    }
}

impl SimilaritySection {
    /// Loads the table (if any) and builds the runtime config. `origin` names the setting
    /// in error messages.
    pub fn resolve(&self, origin: &Path) -> Result<SimilarityConfig, FileError> {
        let table = || {
            self.table.as_deref().ok_or_else(|| FileError::invalid(origin, "similarity.table is required for this mode"))
        };
        let mode = match self.mode {
            SimilarityKind::Exact => SimilarityMode::Exact,
            SimilarityKind::Synonyms => SimilarityMode::Synonyms(load_synonyms(table()?)?),
            SimilarityKind::Embedding => SimilarityMode::Embedding(load_embeddings(table()?)?),
        };
        Ok(SimilarityConfig { mode, tau_sem: self.tau_sem })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSection {
    pub tau_geo: f64,
}

impl Default for MatchingSection {
    fn default() -> Self {
        Self { tau_geo: MatchConfig::default().tau_geo }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSource {
    /// Equal rates over the labels of the configured worlds.
    #[default]
    Uniform,
    /// Estimated from generated worlds of a family (seeds disjoint from the usual range).
    Family(String),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub steps: u32,
    pub samples: usize,
    pub ray_cols: usize,
    pub ray_rows: usize,
    pub yaw_bins: u32,
    pub camera_height: f64,
    pub pitch: f64,
    pub max_range: f64,
    pub candidate_stride: usize,
    pub voxel: f64,
    pub completion_radius: f64,
}

impl Default for PlannerSection {
    fn default() -> Self {
        let p = PlannerConfig::default();
        Self {
            steps: 30,
            samples: p.samples,
            ray_cols: p.ray_grid.cols,
            ray_rows: p.ray_grid.rows,
            yaw_bins: p.yaw_bins,
            camera_height: p.camera_height,
            pitch: p.pitch,
            max_range: p.max_range,
            candidate_stride: p.candidate_stride,
            voxel: p.voxel,
            completion_radius: p.completion_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingSection {
    pub cols: usize,
    pub rows: usize,
}

impl Default for SensingSection {
    fn default() -> Self {
        let g = RayGrid::default();
        Self { cols: g.cols, rows: g.rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Runs per world, with seeds `seed`, `seed + 1`, ...
    #[serde(default = "one")]
    pub repeats: u64,
    pub worlds: Vec<WorldSource>,
    #[serde(default)]
    pub conditions: Conditions,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub predicates: PredicateSection,
    #[serde(default)]
    pub association: AssociationSection,
    #[serde(default)]
    pub similarity: SimilaritySection,
    #[serde(default)]
    pub matching: MatchingSection,
    #[serde(default)]
    pub prior: PriorSource,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub sensing: SensingSection,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Reads `path`, applies `key=value` overrides (dotted keys, JSON or bare-string
    /// values), and resolves relative paths against the file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, FileError> {
        let text = read(path)?;
        let mut cfg: ExperimentConfig = if overrides.is_empty() {
            parse(path, &text)?
        } else {
            let mut value: Value = parse(path, &text)?;
            for o in overrides {
                apply_override(&mut value, o).map_err(|m| FileError::invalid(path, m))?;
            }
            parse_value(path, value)?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.check(path)?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for w in &mut self.worlds {
            if let WorldSource::File { path } = w {
                join(path);
            }
        }
        if let Some(t) = &mut self.similarity.table {
            join(t);
        }
        if let PriorSource::Path(p) = &mut self.prior {
            join(p);
        }
        join(&mut self.output_dir);
    }

    /// Structural checks that need no file IO beyond existence.
    fn check(&self, path: &Path) -> Result<(), FileError> {
        let bad = |m: String| Err(FileError::invalid(path, m));
        if self.worlds.is_empty() {
            return bad("worlds must list at least one world".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        for (i, w) in self.worlds.iter().enumerate() {
            match w {
                WorldSource::File { path: p } if !p.is_file() => return bad(format!("worlds[{i}].path: {} does not exist", p.display())),
                WorldSource::Generated { family, count, .. } => {
                    if let Err(e) = family.parse::<Family>() {
                        return bad(format!("worlds[{i}].family: {e}"));
                    }
                    if *count == 0 {
                        return bad(format!("worlds[{i}].count must be at least 1"));
                    }
                }
                _ => {}
            }
        }
        if let Some(t) = &self.similarity.table {
            if !t.is_file() {
                return bad(format!("similarity.table: {} does not exist", t.display()));
            }
        }
        match &self.prior {
            PriorSource::Path(p) if !p.is_file() => return bad(format!("prior.path: {} does not exist", p.display())),
            PriorSource::Family(f) => {
                if let Err(e) = f.parse::<Family>() {
                    return bad(format!("prior.family: {e}"));
                }
            }
            _ => {}
        }
        if self.conditions.mode == Mode::Static && self.conditions.cameras.is_empty() {
            return bad("conditions.cameras must not be empty for static runs".into());
        }
        if self.conditions.cpm_enabled && self.conditions.cameras.is_empty() {
            return bad("conditions.cameras must not be empty when cpm_enabled is set".into());
        }
        self.pipeline_without_tables().validate().map_err(|e| FileError::invalid(path, e.to_string()))
    }

    fn pipeline_without_tables(&self) -> PipelineConfig {
        let c = &self.conditions;
        let n = &self.noise;
        let noise = if c.zero_noise {
            NoiseConfig { world_scale: n.world_scale, ..NoiseConfig::zero() }
        } else {
            NoiseConfig {
                depth_rel: n.depth_rel,
                translation: n.translation,
                rotation: n.rotation_deg.to_radians(),
                log_scale: n.log_scale,
                label_flip_prob: n.label_flip_prob,
                world_scale: n.world_scale,
            }
        };
        let a = &self.association;
        let association = AssociationConfig {
            geometric_weight: a.geometric_weight,
            semantic_weight: a.semantic_weight,
            threshold: a.threshold,
            min_points: a.min_points,
            mode: if c.oracle_association { AssociationMode::Oracle } else { AssociationMode::Geometric },
        };
        let p = &self.planner;
        let planner = PlannerConfig {
            samples: p.samples,
            ray_grid: RayGrid::new(p.ray_cols, p.ray_rows),
            yaw_bins: p.yaw_bins,
            camera_height: p.camera_height,
            pitch: p.pitch,
            max_range: p.max_range,
            candidate_stride: p.candidate_stride,
            voxel: p.voxel,
            completion_radius: p.completion_radius,
            ..PlannerConfig::default()
        };
        PipelineConfig {
            noise,
            association,
            predicates: PredicateConfig::from(&self.predicates),
            similarity: SimilarityConfig { mode: SimilarityMode::Exact, tau_sem: self.similarity.tau_sem },
            matching: MatchConfig { tau_geo: self.matching.tau_geo },
            sensing_grid: RayGrid::new(self.sensing.cols, self.sensing.rows),
            planner,
        }
    }

    /// Runtime pipeline configuration, loading similarity tables.
    pub fn pipeline(&self, origin: &Path) -> Result<PipelineConfig, FileError> {
        let mut cfg = self.pipeline_without_tables();
        cfg.similarity = self.similarity.resolve(origin)?;
        cfg.validate().map_err(|e| FileError::invalid(origin, e.to_string()))?;
        Ok(cfg)
    }
}

/// Sets `a.b.c=value` inside `root`, creating intermediate objects. The value is parsed as
/// JSON and falls back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("override key `{key}` has an empty component"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = match cur {
            Value::Object(m) => m,
            _ => return Err(format!("override `{key}`: `{}` is not an object", parts[..i].join("."))),
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one component")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.json", r#"{"seed": 3, "worlds": [{"family": "room", "seed": 1}]}"#);
        let cfg = ExperimentConfig::load(&p, &[]).unwrap();
        assert_eq!(cfg.repeats, 1);
        assert_eq!(cfg.planner.steps, 30);
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        let pc = cfg.pipeline(&p).unwrap();
        assert_eq!(pc.noise, NoiseConfig::default());
        assert_eq!(pc.predicates, PredicateConfig::default());
    }

    #[test]
    fn seed_is_mandatory() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.json", r#"{"worlds": [{"family": "room", "seed": 1}]}"#);
        let err = ExperimentConfig::load(&p, &[]).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn errors_carry_field_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.json", r#"{"seed": 3, "worlds": [{"family": "room", "seed": 1}], "noise": {"depth_rel": "high"}}"#);
        match ExperimentConfig::load(&p, &[]).unwrap_err() {
            FileError::Parse { field, .. } => assert_eq!(field, "noise.depth_rel"),
            e => panic!("unexpected {e}"),
        }
        let p = write(dir.path(), "d.json", r#"{"seed": 3, "worlds": [{"family": "castle", "seed": 1}]}"#);
        assert!(ExperimentConfig::load(&p, &[]).unwrap_err().to_string().contains("worlds[0].family"));
        let p = write(dir.path(), "e.json", r#"{"seed": 3, "worlds": [{"path": "missing.json"}]}"#);
        assert!(ExperimentConfig::load(&p, &[]).unwrap_err().to_string().contains("does not exist"));
    }

    #[test]
    fn overrides_apply_dotted_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.json", r#"{"seed": 3, "worlds": [{"family": "room", "seed": 1}]}"#);
        let sets = ["planner.steps=5".to_string(), "conditions.mode=static".into(), "conditions.cameras=[0,1]".into(), "seed=9".into()];
        let cfg = ExperimentConfig::load(&p, &sets).unwrap();
        assert_eq!(cfg.planner.steps, 5);
        assert_eq!(cfg.conditions.mode, Mode::Static);
        assert_eq!(cfg.conditions.cameras, vec![0, 1]);
        assert_eq!(cfg.seed, 9);
        let err = ExperimentConfig::load(&p, &["planner.stepz=5".to_string()]).unwrap_err();
        match err {
            FileError::Parse { field, message, .. } => {
                assert_eq!(field, "planner.stepz");
                assert!(message.contains("stepz"));
            }
            e => panic!("unexpected {e}"),
        }
        assert!(ExperimentConfig::load(&p, &["seed.x=1".to_string()]).is_err());
        assert!(ExperimentConfig::load(&p, &["noequals".to_string()]).is_err());
    }

    #[test]
    fn prior_forms() {
        let v: PriorSource = serde_json::from_str(r#""uniform""#).unwrap();
        assert_eq!(v, PriorSource::Uniform);
        let v: PriorSource = serde_json::from_str(r#"{"family": "apartment"}"#).unwrap();
        assert_eq!(v, PriorSource::Family("apartment".into()));
        let v: PriorSource = serde_json::from_str(r#"{"path": "p.json"}"#).unwrap();
        assert_eq!(v, PriorSource::Path("p.json".into()));
    }

    #[test]
    fn zero_noise_flag_overrides_noise_section() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.json",
            r#"{"seed": 3, "worlds": [{"family": "room", "seed": 1}], "conditions": {"zero_noise": true, "oracle_association": true}}"#,
        );
        let pc = ExperimentConfig::load(&p, &[]).unwrap().pipeline(&p).unwrap();
        assert_eq!(pc.noise, NoiseConfig::zero());
        assert_eq!(pc.association.mode, AssociationMode::Oracle);
    }
}
