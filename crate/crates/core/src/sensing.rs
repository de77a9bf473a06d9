//! Simulated RGB-only geometry estimation.
//!
//! A view is rendered from ground truth into a [`SimulatedFrame`], degraded into a
//! [`FactoredGeometryEstimate`] (per-pixel ray directions, up-to-scale depth, a pose
//! relative to the reference view and a global scale), anchored into the world frame
//! and back-projected into a [`TaggedPointCloud`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::Ray;
use crate::math::{exp, Mat3, Pose, Vec3};
use crate::world::{raycast_scene, HitKind, Intrinsics, WorldSpec, WALL_LABEL};

/// Sampling grid of rays over the image, independent of the nominal resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RayGrid {
    pub cols: usize,
    pub rows: usize,
}

impl Default for RayGrid {
    fn default() -> Self {
        Self { cols: 64, rows: 48 }
    }
}

impl RayGrid {
    pub const fn new(cols: usize, rows: usize) -> Self {
        Self { cols, rows }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Image coordinates sampled by grid cell `(col, row)`: the cell center.
    pub fn pixel(&self, intr: &Intrinsics, col: usize, row: usize) -> (f64, f64) {
        (
            (col as f64 + 0.5) * intr.width as f64 / self.cols as f64,
            (row as f64 + 0.5) * intr.height as f64 / self.rows as f64,
        )
    }

    /// Unit camera-frame ray directions in row-major grid order.
    pub fn ray_directions(&self, intr: &Intrinsics) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.len());
        for row in 0..self.rows {
            for col in 0..self.cols {
                let (u, v) = self.pixel(intr, col, row);
                out.push(pixel_ray(intr, u, v));
            }
        }
        out
    }
}

/// Camera-frame unit ray through image point `(u, v)` (x right, y down, z forward).
pub fn pixel_ray(intr: &Intrinsics, u: f64, v: f64) -> Vec3 {
    Vec3::new((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0)
        .normalized()
        .expect("pinhole rays have positive z")
}

/// Projects a camera-frame point to image coordinates. `None` behind the camera.
pub fn project(intr: &Intrinsics, p_cam: Vec3) -> Option<(f64, f64)> {
    if p_cam.z <= 0.0 {
        return None;
    }
    Some((intr.fx * p_cam.x / p_cam.z + intr.cx, intr.fy * p_cam.y / p_cam.z + intr.cy))
}

/// What one grid ray saw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelHit {
    /// Frame-local instance tag; `None` for walls.
    pub tag: Option<u32>,
    /// True Euclidean range along the ray, meters.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedFrame {
    pub view: u32,
    pub camera_pose_true: Pose,
    pub intrinsics: Intrinsics,
    pub grid: RayGrid,
    /// Row-major per-ray result.
    pub pixels: Vec<Option<PixelHit>>,
    /// Label per frame-local tag.
    pub tag_labels: Vec<String>,
    /// Ground-truth object index per tag; read only by evaluation and oracle association.
    provenance: Vec<usize>,
}

impl SimulatedFrame {
    pub fn label(&self, pixel: usize) -> Option<&str> {
        self.pixels[pixel].map(|h| match h.tag {
            Some(t) => self.tag_labels[t as usize].as_str(),
            None => WALL_LABEL,
        })
    }

    pub fn hit_count(&self) -> usize {
        self.pixels.iter().filter(|p| p.is_some()).count()
    }

    /// Ground-truth object index behind a tag.
    pub fn ground_truth_index(&self, tag: u32) -> Option<usize> {
        self.provenance.get(tag as usize).copied()
    }

    /// Ray count per ground-truth object index.
    pub fn rays_per_object(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for p in self.pixels.iter().flatten() {
            if let Some(t) = p.tag {
                *out.entry(self.provenance[t as usize]).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Casts one ray per grid cell from `pose` into the world. Tags are assigned in order of
/// first appearance in row-major scan, so they carry no cross-view identity.
pub fn render_observation(world: &WorldSpec, pose: &Pose, intr: &Intrinsics, grid: RayGrid, view: u32) -> SimulatedFrame {
    let mut pixels = Vec::with_capacity(grid.len());
    let mut tag_of: BTreeMap<usize, u32> = BTreeMap::new();
    let mut tag_labels = Vec::new();
    let mut provenance = Vec::new();
    for dir in grid.ray_directions(intr) {
        let ray = Ray {
            origin: pose.translation,
            direction: pose.transform_vector(dir),
        };
        let hit = raycast_scene(world, &ray).map(|h| {
            let tag = match h.kind {
                HitKind::Object(i) => Some(*tag_of.entry(i).or_insert_with(|| {
                    tag_labels.push(world.objects()[i].label.clone());
                    provenance.push(i);
                    (provenance.len() - 1) as u32
                })),
                HitKind::Wall(_) => None,
            };
            PixelHit { tag, depth: h.depth }
        });
        pixels.push(hit);
    }
    SimulatedFrame {
        view,
        camera_pose_true: *pose,
        intrinsics: *intr,
        grid,
        pixels,
        tag_labels,
        provenance,
    }
}

/// Noise model of the geometry estimator plus the label-flip rate of the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Relative depth noise standard deviation.
    pub depth_rel: f64,
    /// Translation noise standard deviation per axis, meters.
    pub translation: f64,
    /// Rotation noise standard deviation per axis, radians.
    pub rotation: f64,
    /// Standard deviation of the log scale error.
    pub log_scale: f64,
    pub label_flip_prob: f64,
    /// Metric scale of the world (the estimator's target scale factor).
    pub world_scale: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            depth_rel: 0.02,
            translation: 0.02,
            rotation: 0.5_f64.to_radians(),
            log_scale: 0.02,
            label_flip_prob: 0.05,
            world_scale: 1.0,
        }
    }
}

impl NoiseConfig {
    pub fn zero() -> Self {
        Self {
            depth_rel: 0.0,
            translation: 0.0,
            rotation: 0.0,
            log_scale: 0.0,
            label_flip_prob: 0.0,
            world_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let stds = [self.depth_rel, self.translation, self.rotation, self.log_scale];
        if stds.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig(String::from("noise standard deviations must be nonnegative")));
        }
        if !(0.0..=1.0).contains(&self.label_flip_prob) {
            return Err(Error::InvalidConfig(String::from("noise.label_flip_prob must be in [0, 1]")));
        }
        if !(self.world_scale > 0.0) {
            return Err(Error::InvalidConfig(String::from("noise.world_scale must be positive")));
        }
        Ok(())
    }
}

/// Factored output of the geometry estimator for one view.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredGeometryEstimate {
    pub view: u32,
    /// Unit camera-frame ray per grid cell.
    pub ray_dirs: Vec<Vec3>,
    /// Nonnegative depth per grid cell, up to the global scale; 0 where nothing was hit.
    pub depth_up_to_scale: Vec<f64>,
    /// Camera pose in the reference view's frame, or in the world frame once anchored.
    pub pose_est: Pose,
    /// Estimate of the global metric scale.
    pub scale_est: f64,
    pub anchored: bool,
}

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std).expect("validated standard deviation")
}

/// Degrades a rendered frame into a factored estimate.
///
/// Draw order on `rng`: 3 rotation, 3 translation, 1 scale, then one depth draw per grid
/// cell in row-major order (hit or not), so every value is fixed by (stream, pixel index).
pub fn degrade_to_estimate<R: Rng>(frame: &SimulatedFrame, anchor: &Pose, noise: &NoiseConfig, rng: &mut R) -> FactoredGeometryEstimate {
    let rot = normal(noise.rotation);
    let trans = normal(noise.translation);
    let w = Vec3::new(rot.sample(rng), rot.sample(rng), rot.sample(rng));
    let t = Vec3::new(trans.sample(rng), trans.sample(rng), trans.sample(rng));
    let scale_est = noise.world_scale * exp(normal(noise.log_scale).sample(rng));
    let perturbation = Pose::new(Mat3::from_rotation_vector(w), t);
    let pose_noisy = frame.camera_pose_true.compose(&perturbation);
    let pose_est = anchor.inverse().compose(&pose_noisy);
    let depth_noise = normal(noise.depth_rel);
    let depth_up_to_scale = frame
        .pixels
        .iter()
        .map(|p| {
            let eps = depth_noise.sample(rng);
            match p {
                Some(h) => (h.depth * (1.0 + eps) / noise.world_scale).max(0.0),
                None => 0.0,
            }
        })
        .collect();
    FactoredGeometryEstimate {
        view: frame.view,
        ray_dirs: frame.grid.ray_directions(&frame.intrinsics),
        depth_up_to_scale,
        pose_est,
        scale_est,
        anchored: false,
    }
}

/// Re-expresses every estimate in the world frame by left-composing the known world
/// pose of the reference (first) view. Already-anchored estimates are left unchanged.
pub fn anchor_frame(estimates: Vec<FactoredGeometryEstimate>, anchor_camera_pose_world: &Pose) -> Result<Vec<FactoredGeometryEstimate>> {
    if estimates.is_empty() {
        return Err(Error::EmptyViews);
    }
    Ok(estimates
        .into_iter()
        .map(|mut e| {
            if !e.anchored {
                e.pose_est = anchor_camera_pose_world.compose(&e.pose_est);
                e.anchored = true;
            }
            e
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedPoint {
    pub position: Vec3,
    /// Frame-local instance tag; `None` for wall points.
    pub tag: Option<u32>,
    /// Grid cell the point came from.
    pub pixel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPointCloud {
    pub view: u32,
    pub points: Vec<TaggedPoint>,
    tag_labels: Vec<String>,
    provenance: Vec<usize>,
}

impl TaggedPointCloud {
    pub fn tag_label(&self, tag: u32) -> Option<&str> {
        self.tag_labels.get(tag as usize).map(String::as_str)
    }

    pub fn label(&self, point: &TaggedPoint) -> &str {
        match point.tag {
            Some(t) => &self.tag_labels[t as usize],
            None => WALL_LABEL,
        }
    }

    /// Ground-truth object index behind a tag (evaluation and oracle association only).
    pub fn ground_truth_index(&self, tag: u32) -> Option<usize> {
        self.provenance.get(tag as usize).copied()
    }
}

/// Camera-frame point for grid cell `i`: `scale_est * depth * ray_dir`.
pub fn camera_point(est: &FactoredGeometryEstimate, i: usize) -> Vec3 {
    est.ray_dirs[i] * (est.scale_est * est.depth_up_to_scale[i])
}

/// Composes the factored estimate into metric points, one per hit pixel:
/// `p = pose_est * (scale_est * depth_up_to_scale * ray_dir)`.
pub fn backproject(est: &FactoredGeometryEstimate, frame: &SimulatedFrame) -> TaggedPointCloud {
    let points = frame
        .pixels
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            p.map(|h| TaggedPoint {
                position: est.pose_est.transform_point(camera_point(est, i)),
                tag: h.tag,
                pixel: i,
            })
        })
        .collect();
    TaggedPointCloud {
        view: frame.view,
        points,
        tag_labels: frame.tag_labels.clone(),
        provenance: frame.provenance.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrientedBox;
    use crate::rng::{stream, Purpose};
    use crate::world::{NavGrid, WorldObject};

    fn nav() -> NavGrid {
        let mut g = NavGrid::new((-1.0, -1.0), 0.25, 8, 8);
        g.set((4, 4), true);
        g
    }

    fn wall_world() -> WorldSpec {
        // wall plane at x = 2, far larger than any frustum used below
        let wall = OrientedBox::axis_aligned(Vec3::new(2.5, 0.0, 1.0), Vec3::new(0.5, 50.0, 50.0));
        WorldSpec::new(Vec::new(), alloc::vec![wall], -100.0, nav(), Vec::new()).unwrap()
    }

    #[test]
    fn wall_filling_frustum() {
        let intr = Intrinsics::centered(50, 50, 25.0);
        let pose = Pose::from_yaw_pitch(Vec3::new(0.0, 0.0, 1.0), 0.0, 0.0);
        let grid = RayGrid::new(5, 5);
        let f = render_observation(&wall_world(), &pose, &intr, grid, 0);
        assert_eq!(f.hit_count(), 25);
        let center = f.pixels[2 * 5 + 2].unwrap();
        assert_eq!(center.depth, 2.0);
        assert_eq!(f.label(12), Some(WALL_LABEL));
        for (i, p) in f.pixels.iter().enumerate() {
            // planar wall: range along the ray is 2 / cos(angle to the optical axis)
            let d = grid.ray_directions(&intr)[i];
            assert!((p.unwrap().depth - 2.0 / d.z).abs() < 1e-12);
        }
    }

    #[test]
    fn camera_facing_away_sees_nothing() {
        let intr = Intrinsics::centered(50, 50, 25.0);
        let pose = Pose::from_yaw_pitch(Vec3::new(0.0, 0.0, 1.0), core::f64::consts::PI, 0.0);
        let f = render_observation(&wall_world(), &pose, &intr, RayGrid::new(8, 6), 0);
        assert_eq!(f.hit_count(), 0);
    }

    #[test]
    fn zero_noise_estimate_is_exact() {
        let intr = Intrinsics::centered(64, 48, 40.0);
        let pose = Pose::from_yaw_pitch(Vec3::new(0.0, 0.0, 1.0), 0.1, -0.2);
        let f = render_observation(&wall_world(), &pose, &intr, RayGrid::new(16, 12), 3);
        let mut rng = stream(1, Purpose::Degrade, 3);
        let est = degrade_to_estimate(&f, &Pose::IDENTITY, &NoiseConfig::zero(), &mut rng);
        assert_eq!(est.scale_est, 1.0);
        assert!(est.pose_est.max_abs_diff(&pose) < 1e-15);
        for (p, d) in f.pixels.iter().zip(&est.depth_up_to_scale) {
            assert_eq!(p.map_or(0.0, |h| h.depth), *d);
        }
    }

    #[test]
    fn principal_pixel_backprojects_onto_optical_axis() {
        let intr = Intrinsics::centered(50, 50, 25.0);
        let grid = RayGrid::new(5, 5);
        let f = render_observation(&wall_world(), &Pose::IDENTITY, &intr, grid, 0);
        let mut est = degrade_to_estimate(&f, &Pose::IDENTITY, &NoiseConfig::zero(), &mut stream(0, Purpose::Degrade, 0));
        est.depth_up_to_scale[12] = 3.5;
        est.pose_est = Pose::IDENTITY;
        est.scale_est = 1.0;
        assert_eq!(camera_point(&est, 12), Vec3::new(0.0, 0.0, 3.5));
        let mut doubled = est.clone();
        doubled.scale_est = 2.0;
        for i in 0..grid.len() {
            assert_eq!(camera_point(&doubled, i).norm(), 2.0 * camera_point(&est, i).norm());
        }
    }

    #[test]
    fn degrade_is_deterministic_per_stream() {
        let obj = WorldObject {
            id: "a".into(),
            label: "box".into(),
            bbox: OrientedBox::axis_aligned(Vec3::new(2.0, 0.0, 1.0), Vec3::new(0.3, 0.3, 0.3)),
        };
        let world = WorldSpec::new(alloc::vec![obj], Vec::new(), 0.0, nav(), Vec::new()).unwrap();
        let pose = Pose::from_yaw_pitch(Vec3::new(0.0, 0.0, 1.0), 0.0, 0.0);
        let f = render_observation(&world, &pose, &Intrinsics::centered(64, 48, 40.0), RayGrid::new(16, 12), 0);
        let noise = NoiseConfig::default();
        let a = degrade_to_estimate(&f, &Pose::IDENTITY, &noise, &mut stream(9, Purpose::Degrade, 0));
        let b = degrade_to_estimate(&f, &Pose::IDENTITY, &noise, &mut stream(9, Purpose::Degrade, 0));
        assert_eq!(a, b);
        let cloud = backproject(&a, &f);
        assert_eq!(cloud.points.len(), f.hit_count());
        assert!(cloud.points.iter().all(|p| cloud.label(p) == "box"));
    }

    #[test]
    fn anchoring() {
        let t = Pose::new(Mat3::from_yaw(0.4), Vec3::new(1.0, 2.0, 3.0));
        let est = FactoredGeometryEstimate {
            view: 0,
            ray_dirs: Vec::new(),
            depth_up_to_scale: Vec::new(),
            pose_est: Pose::IDENTITY,
            scale_est: 1.0,
            anchored: false,
        };
        let once = anchor_frame(alloc::vec![est], &t).unwrap();
        assert_eq!(once[0].pose_est, t);
        let twice = anchor_frame(once.clone(), &t).unwrap();
        assert_eq!(once, twice);
        assert_eq!(anchor_frame(Vec::new(), &t), Err(Error::EmptyViews));
    }
}
