//! Scene files: JSON with `floor_z`, `objects`, `walls`, `navigable` and
//! `external_cameras`. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "floor_z": 0.0,
//!   "objects": [{"id": "o000", "label": "table", "center": [1, 2, 0.375],
//!                "half_extents": [0.6, 0.4, 0.375], "yaw": 0.0}],
//!   "walls": [{"center": [0, 3, 1.3], "half_extents": [0.05, 3, 1.3], "yaw": 0.0}],
//!   "navigable": {"origin": [0, 0], "resolution": 0.25, "rows": ["..#", "..."]},
//!   "external_cameras": [{"id": "ext0",
//!       "pose": {"quaternion": [1, 0, 0, 0], "translation": [0, 0, 2.3]},
//!       "intrinsics": {"width": 640, "height": 480, "fx": 260, "fy": 260, "cx": 320, "cy": 240}}]
//! }
//! ```
//!
//! `rows[iy]` holds grid row `iy` (increasing y); `.` is navigable, `#` blocked. Poses map
//! camera to world, the quaternion is `[w, x, y, z]`, and cameras follow the x-right,
//! y-down, z-forward convention.

use std::path::Path;

use activesg_core::geometry::OrientedBox;
use activesg_core::math::{Pose, Vec3};
use activesg_core::world::{ExternalCamera, Intrinsics, NavGrid, WorldObject, WorldSpec};
use serde::{Deserialize, Serialize};

use crate::error::{parse, read, FileError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxEntry {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    pub yaw: f64,
}

impl From<&OrientedBox> for BoxEntry {
    fn from(b: &OrientedBox) -> Self {
        Self { center: b.center.to_array(), half_extents: b.half_extents.to_array(), yaw: b.yaw }
    }
}

impl From<&BoxEntry> for OrientedBox {
    fn from(b: &BoxEntry) -> Self {
        OrientedBox::new(Vec3::from_array(b.center), Vec3::from_array(b.half_extents), b.yaw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectEntry {
    id: String,
    label: String,
    center: [f64; 3],
    half_extents: [f64; 3],
    yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NavEntry {
    origin: [f64; 2],
    resolution: f64,
    rows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseEntry {
    quaternion: [f64; 4],
    translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicsEntry {
    width: u32,
    height: u32,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraEntry {
    id: String,
    pose: PoseEntry,
    intrinsics: IntrinsicsEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    floor_z: f64,
    objects: Vec<ObjectEntry>,
    walls: Vec<BoxEntry>,
    navigable: NavEntry,
    external_cameras: Vec<CameraEntry>,
}

fn nav_from_rows(path: &Path, e: &NavEntry) -> Result<NavGrid, FileError> {
    let width = e.rows.first().map_or(0, |r| r.chars().count());
    if e.rows.is_empty() || width == 0 {
        return Err(FileError::invalid(path, "navigable.rows is empty"));
    }
    let mut nav = NavGrid::new((e.origin[0], e.origin[1]), e.resolution, width, e.rows.len());
    for (iy, row) in e.rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(FileError::invalid(path, format!("navigable.rows[{iy}] has a different length than row 0")));
        }
        for (ix, ch) in row.chars().enumerate() {
            match ch {
                '.' => nav.set((ix as i32, iy as i32), true),
                '#' => {}
                other => return Err(FileError::invalid(path, format!("navigable.rows[{iy}]: unexpected character `{other}`"))),
            }
        }
    }
    Ok(nav)
}

fn rows_from_nav(nav: &NavGrid) -> Vec<String> {
    (0..nav.height as i32)
        .map(|iy| (0..nav.width as i32).map(|ix| if nav.is_navigable((ix, iy)) { '.' } else { '#' }).collect())
        .collect()
}

/// Parses and validates scene text. `path` is used for error messages only.
pub fn parse_scene(path: &Path, text: &str) -> Result<WorldSpec, FileError> {
    let file: SceneFile = parse(path, text)?;
    let objects = file
        .objects
        .iter()
        .map(|o| WorldObject {
            id: o.id.clone(),
            label: o.label.clone(),
            bbox: OrientedBox::new(Vec3::from_array(o.center), Vec3::from_array(o.half_extents), o.yaw),
        })
        .collect();
    let walls = file.walls.iter().map(OrientedBox::from).collect();
    let nav = nav_from_rows(path, &file.navigable)?;
    let mut cameras = Vec::new();
    for (i, c) in file.external_cameras.iter().enumerate() {
        let pose = Pose::from_quaternion(c.pose.quaternion, Vec3::from_array(c.pose.translation))
            .ok_or_else(|| FileError::invalid(path, format!("external_cameras[{i}].pose.quaternion has zero norm")))?;
        let k = &c.intrinsics;
        cameras.push(ExternalCamera {
            id: c.id.clone(),
            pose,
            intrinsics: Intrinsics { width: k.width, height: k.height, fx: k.fx, fy: k.fy, cx: k.cx, cy: k.cy },
        });
    }
    WorldSpec::new(objects, walls, file.floor_z, nav, cameras).map_err(|e| FileError::invalid(path, e.to_string()))
}

pub fn load_scene(path: &Path) -> Result<WorldSpec, FileError> {
    parse_scene(path, &read(path)?)
}

/// Pretty JSON text of `world`, ending in a newline.
pub fn scene_to_string(world: &WorldSpec) -> String {
    let g = world.navigable();
    let file = SceneFile {
        floor_z: world.floor_z(),
        objects: world
            .objects()
            .iter()
            .map(|o| ObjectEntry {
                id: o.id.clone(),
                label: o.label.clone(),
                center: o.bbox.center.to_array(),
                half_extents: o.bbox.half_extents.to_array(),
                yaw: o.bbox.yaw,
            })
            .collect(),
        walls: world.walls().iter().map(BoxEntry::from).collect(),
        navigable: NavEntry { origin: [g.origin.0, g.origin.1], resolution: g.resolution, rows: rows_from_nav(g) },
        external_cameras: world
            .external_cameras()
            .iter()
            .map(|c| {
                let k = c.intrinsics;
                CameraEntry {
                    id: c.id.clone(),
                    pose: PoseEntry { quaternion: c.pose.rotation.to_quaternion(), translation: c.pose.translation.to_array() },
                    intrinsics: IntrinsicsEntry { width: k.width, height: k.height, fx: k.fx, fy: k.fy, cx: k.cx, cy: k.cy },
                }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("scene serializes");
    s.push('\n');
    s
}

pub fn save_scene(world: &WorldSpec, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, scene_to_string(world))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "floor_z": 0.0,
        "objects": [{"id": "t", "label": "table", "center": [1, 1, 0.4], "half_extents": [0.5, 0.3, 0.4], "yaw": 0.2}],
        "walls": [],
        "navigable": {"origin": [0, 0], "resolution": 0.25, "rows": ["..", ".#"]},
        "external_cameras": [{"id": "c", "pose": {"quaternion": [1, 0, 0, 0], "translation": [0, 0, 2]},
            "intrinsics": {"width": 64, "height": 48, "fx": 30, "fy": 30, "cx": 32, "cy": 24}}]
    }"#;

    #[test]
    fn minimal_scene_loads() {
        let w = parse_scene(Path::new("m.json"), MINIMAL).unwrap();
        assert_eq!(w.objects().len(), 1);
        assert_eq!(w.navigable().navigable_count(), 3);
        assert!(!w.navigable().is_navigable((1, 1)));
    }

    #[test]
    fn duplicate_ids_are_named() {
        let text = MINIMAL.replace(
            r#""objects": [{"#,
            r#""objects": [{"id": "t", "label": "cup", "center": [1, 1, 1], "half_extents": [0.1, 0.1, 0.1], "yaw": 0}, {"#,
        );
        let err = parse_scene(Path::new("d.json"), &text).unwrap_err().to_string();
        assert!(err.contains("duplicate id"), "{err}");
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let text = MINIMAL.replace(r#""yaw": 0.2"#, r#""yaw": 0.2, "color": "red""#);
        match parse_scene(Path::new("u.json"), &text).unwrap_err() {
            FileError::Parse { field, message, line, .. } => {
                assert_eq!(field, "objects[0].color");
                assert!(message.contains("color"));
                assert_eq!(line, 3);
            }
            e => panic!("unexpected {e}"),
        }
    }
}
