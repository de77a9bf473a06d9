use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math::{floor, Pose, Vec3};
use crate::sensing::SimulatedFrame;
use crate::world::{Cell, NavGrid, WorldSpec, WALL_LABEL};

/// Index into [`CoverageMap::labels`].
pub type LabelId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoxelState {
    Unknown,
    Free,
    Occupied(LabelId),
}

/// 3D voxel grid of what has been observed so far.
///
/// States only move forward: unknown to free or occupied. Free and occupied voxels never
/// return to unknown, and an occupied voxel is never cleared by later free-space evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    origin: Vec3,
    voxel: f64,
    dims: [usize; 3],
    states: Vec<VoxelState>,
    labels: Vec<String>,
}

impl CoverageMap {
    pub fn new(min: Vec3, max: Vec3, voxel: f64) -> Self {
        let dim = |lo: f64, hi: f64| (libm::ceil((hi - lo) / voxel - 1e-9) as usize).max(1);
        let dims = [dim(min.x, max.x), dim(min.y, max.y), dim(min.z, max.z)];
        Self {
            origin: min,
            voxel,
            dims,
            states: alloc::vec![VoxelState::Unknown; dims[0] * dims[1] * dims[2]],
            labels: Vec::new(),
        }
    }

    /// Grid over the world's bounds starting at the floor.
    pub fn for_world(world: &WorldSpec, voxel: f64) -> Self {
        let (lo, hi) = world.bounds();
        Self::new(lo, hi, voxel)
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.labels[id as usize]
    }

    pub fn intern(&mut self, label: &str) -> LabelId {
        match self.labels.iter().position(|l| l == label) {
            Some(i) => i as LabelId,
            None => {
                self.labels.push(String::from(label));
                (self.labels.len() - 1) as LabelId
            }
        }
    }

    pub fn index(&self, v: [usize; 3]) -> usize {
        (v[2] * self.dims[1] + v[1]) * self.dims[0] + v[0]
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let y = (index / self.dims[0]) % self.dims[1];
        let z = index / (self.dims[0] * self.dims[1]);
        [x, y, z]
    }

    pub fn voxel_of(&self, p: Vec3) -> Option<[usize; 3]> {
        let rel = (p - self.origin) / self.voxel;
        let c = [floor(rel.x), floor(rel.y), floor(rel.z)];
        if c.iter().zip(self.dims).all(|(&v, d)| v >= 0.0 && v < d as f64) {
            Some([c[0] as usize, c[1] as usize, c[2] as usize])
        } else {
            None
        }
    }

    pub fn voxel_center(&self, v: [usize; 3]) -> Vec3 {
        self.origin + Vec3::new(v[0] as f64 + 0.5, v[1] as f64 + 0.5, v[2] as f64 + 0.5) * self.voxel
    }

    pub fn state(&self, index: usize) -> VoxelState {
        self.states[index]
    }

    pub fn states(&self) -> &[VoxelState] {
        &self.states
    }

    pub fn set_state(&mut self, index: usize, next: VoxelState) {
        let cur = self.states[index];
        self.states[index] = match (cur, next) {
            (VoxelState::Unknown, n) => n,
            (VoxelState::Occupied(l), _) => VoxelState::Occupied(l),
            (VoxelState::Free, _) => VoxelState::Free,
        };
    }

    pub fn unknown_count(&self) -> usize {
        self.states.iter().filter(|s| **s == VoxelState::Unknown).count()
    }

    pub fn unknown_fraction(&self) -> f64 {
        self.unknown_count() as f64 / self.states.len() as f64
    }

    /// Voxel layer containing height `z`, clamped to the grid.
    pub fn layer_of(&self, z: f64) -> usize {
        let l = floor((z - self.origin.z) / self.voxel);
        (l.max(0.0) as usize).min(self.dims[2] - 1)
    }

    /// Visits voxels pierced by the segment `origin + t*dir`, `t in [0, max_t]`, in order.
    /// The callback receives `(voxel index, t_enter, t_exit)` and returns `false` to stop.
    pub fn traverse(&self, origin: Vec3, dir: Vec3, max_t: f64, mut visit: impl FnMut(usize, f64, f64) -> bool) {
        let size = Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.voxel;
        let lo = self.origin;
        let hi = self.origin + size;
        let mut t0: f64 = 0.0;
        let mut t1 = max_t;
        for a in 0..3 {
            if dir[a].abs() < 1e-300 {
                if origin[a] < lo[a] || origin[a] >= hi[a] {
                    return;
                }
            } else {
                let ta = (lo[a] - origin[a]) / dir[a];
                let tb = (hi[a] - origin[a]) / dir[a];
                t0 = t0.max(ta.min(tb));
                t1 = t1.min(ta.max(tb));
            }
        }
        if t0 >= t1 {
            return;
        }
        let start = origin + dir * (t0 + 1e-9);
        let rel = (start - lo) / self.voxel;
        let mut cell = [0i64; 3];
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            cell[a] = (floor(rel[a]) as i64).clamp(0, self.dims[a] as i64 - 1);
            if dir[a] > 0.0 {
                step[a] = 1;
                let boundary = lo[a] + (cell[a] + 1) as f64 * self.voxel;
                t_max[a] = (boundary - origin[a]) / dir[a];
                t_delta[a] = self.voxel / dir[a];
            } else if dir[a] < 0.0 {
                step[a] = -1;
                let boundary = lo[a] + cell[a] as f64 * self.voxel;
                t_max[a] = (boundary - origin[a]) / dir[a];
                t_delta[a] = -self.voxel / dir[a];
            }
        }
        let mut t_enter = t0;
        loop {
            let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            let t_exit = t_max[axis].min(t1);
            let idx = self.index([cell[0] as usize, cell[1] as usize, cell[2] as usize]);
            if !visit(idx, t_enter, t_exit) || t_max[axis] >= t1 {
                return;
            }
            t_enter = t_max[axis];
            cell[axis] += step[axis];
            if cell[axis] < 0 || cell[axis] >= self.dims[axis] as i64 {
                return;
            }
            t_max[axis] += t_delta[axis];
        }
    }

    /// True when the voxel at camera height above `cell` is free and no voxel between the
    /// floor and camera height is occupied.
    pub fn column_known_free(&self, nav: &NavGrid, cell: Cell, camera_height: f64) -> bool {
        let (x, y) = nav.cell_center(cell);
        let Some(top) = self.voxel_of(Vec3::new(x, y, self.origin.z + camera_height)) else {
            return false;
        };
        if self.states[self.index(top)] != VoxelState::Free {
            return false;
        }
        (0..=top[2]).all(|z| !matches!(self.states[self.index([top[0], top[1], z])], VoxelState::Occupied(_)))
    }
}

/// Marks voxels along every ray of `frame` (observed from `pose`): the voxel holding each
/// hit becomes occupied with the hit label, voxels traversed before it become free. Rays
/// without a hit clear voxels up to `max_range`. Occupied marks are applied first.
pub fn update_coverage(cov: &mut CoverageMap, frame: &SimulatedFrame, pose: &Pose, max_range: f64) {
    let dirs = frame.grid.ray_directions(&frame.intrinsics);
    let origin = pose.translation;
    let mut hit_ranges = Vec::with_capacity(dirs.len());
    for (i, d) in dirs.iter().enumerate() {
        let dir = pose.transform_vector(*d);
        let hit = frame.pixels[i];
        if let Some(h) = hit {
            if h.depth <= max_range {
                let label = frame.label(i).unwrap_or(WALL_LABEL);
                let id = cov.intern(label);
                if let Some(v) = cov.voxel_of(origin + dir * (h.depth + 1e-6)) {
                    let idx = cov.index(v);
                    cov.set_state(idx, VoxelState::Occupied(id));
                }
            }
        }
        hit_ranges.push((dir, hit.map_or(max_range, |h| h.depth.min(max_range))));
    }
    for (dir, range) in hit_ranges {
        let mut free = Vec::new();
        cov.traverse(origin, dir, range, |idx, _t0, t1| {
            if t1 < range - 1e-9 {
                free.push(idx);
                true
            } else {
                false
            }
        });
        for idx in free {
            cov.set_state(idx, VoxelState::Free);
        }
    }
}

/// Grid-path lengths (4-connected steps) from `start` over cells where `passable` holds.
/// `start` itself is always passable. Unreached cells are `None`.
pub fn bfs_distances(nav: &NavGrid, start: Cell, passable: impl Fn(Cell) -> bool) -> Vec<Option<u32>> {
    let mut dist = alloc::vec![None; nav.width * nav.height];
    if !nav.in_bounds(start) {
        return dist;
    }
    let idx = |c: Cell| c.1 as usize * nav.width + c.0 as usize;
    dist[idx(start)] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        let d = dist[idx(c)].unwrap_or(0);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = (c.0 + dx, c.1 + dy);
            if nav.in_bounds(n) && dist[idx(n)].is_none() && passable(n) {
                dist[idx(n)] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}
