//! Synthetic ground-truth environments.

pub mod generate;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{obb_corners, OrientedBox, Ray};
use crate::graph::{derive_edges, ObjectNode, PredicateConfig, SceneGraph};
use crate::math::{cos, sin, Pose, Vec3};

/// Label reported for wall hits. Walls never become object nodes.
pub const WALL_LABEL: &str = "wall";

#[derive(Debug, Clone, PartialEq)]
pub struct WorldObject {
    pub id: String,
    pub label: String,
    pub bbox: OrientedBox,
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    /// Square pixels, principal point at the image center.
    pub fn centered(width: u32, height: u32, focal: f64) -> Self {
        Self {
            width,
            height,
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.width > 0
            && self.height > 0
            && self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < self.width as f64
            && self.cy >= 0.0
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidWorld(format!("intrinsics out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalCamera {
    pub id: String,
    pub pose: Pose,
    pub intrinsics: Intrinsics,
}

/// 2D navigability grid at floor level. Cell `(ix, iy)` covers
/// `[origin.x + ix*res, origin.x + (ix+1)*res) x [origin.y + iy*res, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NavGrid {
    pub origin: (f64, f64),
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    /// Row-major, `cells[iy * width + ix]`; `true` = navigable.
    pub cells: Vec<bool>,
}

pub type Cell = (i32, i32);

impl NavGrid {
    pub fn new(origin: (f64, f64), resolution: f64, width: usize, height: usize) -> Self {
        Self {
            origin,
            resolution,
            width,
            height,
            cells: alloc::vec![false; width * height],
        }
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && (c.0 as usize) < self.width && (c.1 as usize) < self.height
    }

    pub fn is_navigable(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.cells[c.1 as usize * self.width + c.0 as usize]
    }

    pub fn set(&mut self, c: Cell, v: bool) {
        if self.in_bounds(c) {
            self.cells[c.1 as usize * self.width + c.0 as usize] = v;
        }
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Cell {
        (
            libm::floor((x - self.origin.0) / self.resolution) as i32,
            libm::floor((y - self.origin.1) / self.resolution) as i32,
        )
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        (
            self.origin.0 + (c.0 as f64 + 0.5) * self.resolution,
            self.origin.1 + (c.1 as f64 + 0.5) * self.resolution,
        )
    }

    pub fn navigable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |iy| (0..self.width).map(move |ix| (ix as i32, iy as i32))).filter(|&c| self.is_navigable(c))
    }

    pub fn navigable_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

#[derive(Debug, Clone, Copy)]
struct PreparedBox {
    bbox: OrientedBox,
    sin: f64,
    cos: f64,
}

impl PreparedBox {
    fn new(bbox: OrientedBox) -> Self {
        Self { bbox, sin: sin(bbox.yaw), cos: cos(bbox.yaw) }
    }

    fn hit(&self, ray: &Ray) -> Option<f64> {
        let d = ray.origin - self.bbox.center;
        let (s, c) = (self.sin, self.cos);
        let o = Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z);
        let v = ray.direction;
        let dir = Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z);
        crate::geometry::slab(o, dir, self.bbox.half_extents)
    }
}

/// What a ray hit in the ground-truth world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HitKind {
    /// Index into [`WorldSpec::objects`].
    Object(usize),
    /// Index into [`WorldSpec::walls`].
    Wall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub kind: HitKind,
    /// Euclidean distance along the (unit) ray.
    pub depth: f64,
}

impl Hit {
    pub fn id<'w>(&self, world: &'w WorldSpec) -> &'w str {
        match self.kind {
            HitKind::Object(i) => &world.objects[i].id,
            HitKind::Wall(_) => WALL_LABEL,
        }
    }

    pub fn label<'w>(&self, world: &'w WorldSpec) -> &'w str {
        match self.kind {
            HitKind::Object(i) => &world.objects[i].label,
            HitKind::Wall(_) => WALL_LABEL,
        }
    }
}

/// Validated, immutable world description.
#[derive(Debug, Clone)]
pub struct WorldSpec {
    objects: Vec<WorldObject>,
    walls: Vec<OrientedBox>,
    floor_z: f64,
    navigable: NavGrid,
    external_cameras: Vec<ExternalCamera>,
    prepared_objects: Vec<PreparedBox>,
    prepared_walls: Vec<PreparedBox>,
}

impl PartialEq for WorldSpec {
    fn eq(&self, o: &Self) -> bool {
        self.objects == o.objects
            && self.walls == o.walls
            && self.floor_z == o.floor_z
            && self.navigable == o.navigable
            && self.external_cameras == o.external_cameras
    }
}

impl WorldSpec {
    pub fn new(
        objects: Vec<WorldObject>,
        walls: Vec<OrientedBox>,
        floor_z: f64,
        navigable: NavGrid,
        external_cameras: Vec<ExternalCamera>,
    ) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for o in &objects {
            if o.id.is_empty() {
                return Err(Error::InvalidWorld("empty object id".to_string()));
            }
            if !ids.insert(o.id.as_str()) {
                return Err(Error::InvalidWorld(format!("duplicate id `{}`", o.id)));
            }
            if o.label.trim().is_empty() {
                return Err(Error::InvalidWorld(format!("object `{}` has an empty label", o.id)));
            }
            if !o.bbox.is_valid() {
                return Err(Error::InvalidWorld(format!("object `{}` has non-positive half extents", o.id)));
            }
            if o.bbox.bottom_z() < floor_z - 1e-9 {
                return Err(Error::InvalidWorld(format!("object `{}` extends below the floor", o.id)));
            }
        }
        for (i, w) in walls.iter().enumerate() {
            if !w.is_valid() {
                return Err(Error::InvalidWorld(format!("wall {i} has non-positive half extents")));
            }
        }
        if !floor_z.is_finite() {
            return Err(Error::InvalidWorld("floor_z is not finite".to_string()));
        }
        if !(navigable.resolution > 0.0) || navigable.cells.len() != navigable.width * navigable.height {
            return Err(Error::InvalidWorld("navigable grid is malformed".to_string()));
        }
        if navigable.navigable_count() == 0 {
            return Err(Error::InvalidWorld("navigable region is empty".to_string()));
        }
        let mut cam_ids = BTreeSet::new();
        for c in &external_cameras {
            if !cam_ids.insert(c.id.as_str()) {
                return Err(Error::InvalidWorld(format!("duplicate id `{}`", c.id)));
            }
            if c.pose.rotation.orthonormality_error() > 1e-9 {
                return Err(Error::InvalidWorld(format!("camera `{}` rotation is not orthonormal", c.id)));
            }
            c.intrinsics.validate()?;
        }
        let prepared_objects = objects.iter().map(|o| PreparedBox::new(o.bbox)).collect();
        let prepared_walls = walls.iter().map(|w| PreparedBox::new(*w)).collect();
        Ok(Self {
            objects,
            walls,
            floor_z,
            navigable,
            external_cameras,
            prepared_objects,
            prepared_walls,
        })
    }

    pub fn objects(&self) -> &[WorldObject] {
        &self.objects
    }

    pub fn walls(&self) -> &[OrientedBox] {
        &self.walls
    }

    pub fn floor_z(&self) -> f64 {
        self.floor_z
    }

    pub fn navigable(&self) -> &NavGrid {
        &self.navigable
    }

    pub fn external_cameras(&self) -> &[ExternalCamera] {
        &self.external_cameras
    }

    /// Sorted, de-duplicated object labels.
    pub fn label_vocabulary(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.objects.iter().map(|o| o.label.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    /// Axis-aligned bounds of all geometry and the navigable grid, starting at the floor.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let g = &self.navigable;
        let mut lo = Vec3::new(g.origin.0, g.origin.1, self.floor_z);
        let mut hi = Vec3::new(
            g.origin.0 + g.width as f64 * g.resolution,
            g.origin.1 + g.height as f64 * g.resolution,
            self.floor_z,
        );
        for b in self.walls.iter().chain(self.objects.iter().map(|o| &o.bbox)) {
            let (a, c) = b.aabb();
            lo = lo.component_min(a);
            hi = hi.component_max(c);
        }
        lo.z = self.floor_z;
        (lo, hi)
    }
}

/// Nearest intersection of `ray` with any object or wall.
pub fn raycast_scene(world: &WorldSpec, ray: &Ray) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    let mut consider = |t: f64, kind: HitKind| {
        if t > 0.0 && best.is_none_or(|b| t < b.depth) {
            best = Some(Hit { kind, depth: t });
        }
    };
    for (i, b) in world.prepared_objects.iter().enumerate() {
        if let Some(t) = b.hit(ray) {
            consider(t, HitKind::Object(i));
        }
    }
    for (i, b) in world.prepared_walls.iter().enumerate() {
        if let Some(t) = b.hit(ray) {
            consider(t, HitKind::Wall(i));
        }
    }
    best
}

/// Ground-truth scene graph: one node per object with its exact box and label, edges
/// from the same predicate procedure used on estimated graphs.
pub fn ground_truth_graph(world: &WorldSpec, cfg: &PredicateConfig) -> SceneGraph {
    let mut graph = SceneGraph::default();
    for o in &world.objects {
        let node = ObjectNode::from_points(o.id.clone(), &o.label, obb_corners(&o.bbox).to_vec(), Some(o.bbox), 0);
        graph.nodes.insert(o.id.clone(), node);
    }
    graph.edges = derive_edges(graph.nodes.values(), cfg);
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Relation;

    fn grid() -> NavGrid {
        let mut g = NavGrid::new((0.0, 0.0), 0.25, 4, 4);
        g.set((1, 1), true);
        g
    }

    fn obj(id: &str, label: &str, b: OrientedBox) -> WorldObject {
        WorldObject { id: id.into(), label: label.into(), bbox: b }
    }

    #[test]
    fn rejects_duplicate_ids() {
        let b = OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 0.5), Vec3::new(0.5, 0.5, 0.5));
        let err = WorldSpec::new(alloc::vec![obj("a", "x", b), obj("a", "y", b)], Vec::new(), 0.0, grid(), Vec::new()).unwrap_err();
        assert!(matches!(err, Error::InvalidWorld(ref m) if m.contains("duplicate id")), "{err:?}");
    }

    #[test]
    fn rejects_objects_below_floor_and_empty_grid() {
        let b = OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 0.2), Vec3::new(0.5, 0.5, 0.5));
        assert!(WorldSpec::new(alloc::vec![obj("a", "x", b)], Vec::new(), 0.0, grid(), Vec::new()).is_err());
        let empty = NavGrid::new((0.0, 0.0), 0.25, 2, 2);
        assert!(WorldSpec::new(Vec::new(), Vec::new(), 0.0, empty, Vec::new()).is_err());
    }

    #[test]
    fn raycast_occlusion_ordering() {
        let near = OrientedBox::axis_aligned(Vec3::new(2.0, 0.0, 0.5), Vec3::new(0.2, 0.2, 0.2));
        let far = OrientedBox::axis_aligned(Vec3::new(4.0, 0.0, 0.5), Vec3::new(0.2, 0.2, 0.2));
        let w = WorldSpec::new(alloc::vec![obj("far", "b", far), obj("near", "a", near)], Vec::new(), 0.0, grid(), Vec::new()).unwrap();
        let ray = Ray::new(Vec3::new(0.0, 0.0, 0.5), Vec3::X).unwrap();
        let hit = raycast_scene(&w, &ray).unwrap();
        assert_eq!(hit.id(&w), "near");
        assert!((hit.depth - 1.8).abs() < 1e-12);
        let empty = Ray::new(Vec3::new(0.0, 0.0, 0.5), -Vec3::X).unwrap();
        assert!(raycast_scene(&w, &empty).is_none());
    }

    #[test]
    fn ground_truth_cup_on_table() {
        let table = OrientedBox::axis_aligned(Vec3::new(0.0, 0.0, 0.375), Vec3::new(0.6, 0.4, 0.375));
        let cup = OrientedBox::axis_aligned(Vec3::new(0.1, 0.0, 0.8), Vec3::new(0.04, 0.04, 0.05));
        let w = WorldSpec::new(alloc::vec![obj("table", "table", table), obj("cup", "cup", cup)], Vec::new(), 0.0, grid(), Vec::new()).unwrap();
        let g = ground_truth_graph(&w, &PredicateConfig::default());
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.relation("cup", "table"), Some(Relation::OnTopOf));
        assert_eq!(g.relation("table", "cup"), Some(Relation::SupportedBy));
        assert_eq!(g.edges.len(), 2);
        let empty = WorldSpec::new(Vec::new(), Vec::new(), 0.0, grid(), Vec::new()).unwrap();
        assert!(ground_truth_graph(&empty, &PredicateConfig::default()).nodes.is_empty());
    }
}
