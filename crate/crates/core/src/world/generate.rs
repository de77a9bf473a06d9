//! Procedural worlds: single furnished rooms and multi-room apartments.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use super::{ExternalCamera, Intrinsics, NavGrid, WorldObject, WorldSpec};
use crate::error::{Error, Result};
use crate::geometry::OrientedBox;
use crate::math::{sqrt, Pose, Vec3};
use crate::rng::{stream, Purpose, Stream};

pub const WALL_HEIGHT: f64 = 2.6;
pub const WALL_THICKNESS: f64 = 0.1;
pub const NAV_RESOLUTION: f64 = 0.25;
/// Robot footprint radius used to carve the navigable grid.
pub const NAV_CLEARANCE: f64 = 0.3;
pub const DOOR_WIDTH: f64 = 1.0;
/// Upper bound on any object's half diagonal.
pub const MAX_HALF_DIAGONAL: f64 = 0.95;

pub fn robot_intrinsics() -> Intrinsics {
    Intrinsics::centered(640, 480, 320.0)
}

pub fn external_intrinsics() -> Intrinsics {
    Intrinsics::centered(640, 480, 260.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Room,
    Apartment,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Room => "room",
            Family::Apartment => "apartment",
        }
    }

    /// Inclusive object-count range of the family.
    pub fn object_range(self) -> (usize, usize) {
        match self {
            Family::Room => (20, 30),
            Family::Apartment => (100, 130),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "room" => Ok(Family::Room),
            "apartment" => Ok(Family::Apartment),
            _ => Err(Error::UnknownFamily(String::from(s))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Stands on the floor.
    Floor,
    /// Stands on the floor and carries small items.
    Support,
    /// Rests on a support.
    Item,
}

struct LabelSpec {
    label: &'static str,
    half: [f64; 3],
    kind: Kind,
}

const fn spec(label: &'static str, x: f64, y: f64, z: f64, kind: Kind) -> LabelSpec {
    LabelSpec { label, half: [x, y, z], kind }
}

const CATALOG: &[LabelSpec] = &[
    spec("sofa", 0.75, 0.4, 0.4, Kind::Floor),
    spec("armchair", 0.4, 0.4, 0.4, Kind::Floor),
    spec("coffee_table", 0.5, 0.3, 0.22, Kind::Support),
    spec("tv_stand", 0.6, 0.22, 0.25, Kind::Support),
    spec("bookshelf", 0.4, 0.18, 0.8, Kind::Floor),
    spec("floor_lamp", 0.15, 0.15, 0.8, Kind::Floor),
    spec("plant", 0.2, 0.2, 0.4, Kind::Floor),
    spec("side_table", 0.25, 0.25, 0.3, Kind::Support),
    spec("counter", 0.7, 0.3, 0.45, Kind::Support),
    spec("fridge", 0.35, 0.35, 0.85, Kind::Floor),
    spec("stove", 0.3, 0.3, 0.45, Kind::Support),
    spec("kitchen_table", 0.6, 0.4, 0.38, Kind::Support),
    spec("dining_table", 0.7, 0.45, 0.38, Kind::Support),
    spec("chair", 0.22, 0.22, 0.45, Kind::Floor),
    spec("trash_can", 0.15, 0.15, 0.3, Kind::Floor),
    spec("bed", 0.78, 0.45, 0.25, Kind::Support),
    spec("nightstand", 0.22, 0.2, 0.28, Kind::Support),
    spec("wardrobe", 0.45, 0.28, 0.75, Kind::Floor),
    spec("dresser", 0.5, 0.25, 0.4, Kind::Support),
    spec("toilet", 0.2, 0.3, 0.2, Kind::Floor),
    spec("sink_cabinet", 0.35, 0.25, 0.42, Kind::Support),
    spec("bathtub", 0.75, 0.35, 0.28, Kind::Floor),
    spec("desk", 0.6, 0.35, 0.37, Kind::Support),
    spec("office_chair", 0.28, 0.28, 0.5, Kind::Floor),
    spec("filing_cabinet", 0.2, 0.25, 0.35, Kind::Support),
    spec("book", 0.1, 0.07, 0.02, Kind::Item),
    spec("vase", 0.06, 0.06, 0.12, Kind::Item),
    spec("cup", 0.04, 0.04, 0.05, Kind::Item),
    spec("remote", 0.08, 0.025, 0.01, Kind::Item),
    spec("bowl", 0.08, 0.08, 0.04, Kind::Item),
    spec("plate", 0.11, 0.11, 0.01, Kind::Item),
    spec("kettle", 0.1, 0.08, 0.1, Kind::Item),
    spec("bottle", 0.04, 0.04, 0.12, Kind::Item),
    spec("lamp", 0.1, 0.1, 0.2, Kind::Item),
    spec("alarm_clock", 0.06, 0.03, 0.05, Kind::Item),
    spec("pillow", 0.25, 0.15, 0.06, Kind::Item),
    spec("soap", 0.04, 0.03, 0.02, Kind::Item),
    spec("towel", 0.15, 0.1, 0.03, Kind::Item),
    spec("monitor", 0.25, 0.05, 0.18, Kind::Item),
    spec("laptop", 0.17, 0.12, 0.01, Kind::Item),
    spec("keyboard", 0.22, 0.07, 0.01, Kind::Item),
    spec("mug", 0.045, 0.045, 0.05, Kind::Item),
    spec("tv", 0.5, 0.04, 0.3, Kind::Item),
    spec("box", 0.12, 0.1, 0.08, Kind::Item),
    spec("toaster", 0.13, 0.08, 0.09, Kind::Item),
    spec("microwave", 0.25, 0.18, 0.15, Kind::Item),
];

fn lookup(label: &str) -> &'static LabelSpec {
    CATALOG.iter().find(|s| s.label == label).expect("label is in the catalog")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RoomType {
    Living,
    Kitchen,
    Bedroom,
    Bathroom,
    Office,
    Dining,
}

impl RoomType {
    /// Floor furniture; the leading entries are placed first, once each.
    fn furniture(self) -> &'static [&'static str] {
        match self {
            RoomType::Living => &["sofa", "coffee_table", "tv_stand", "armchair", "bookshelf", "floor_lamp", "plant", "side_table"],
            RoomType::Kitchen => &["counter", "fridge", "stove", "kitchen_table", "chair", "trash_can"],
            RoomType::Bedroom => &["bed", "nightstand", "wardrobe", "dresser", "chair", "plant"],
            RoomType::Bathroom => &["toilet", "sink_cabinet", "bathtub", "trash_can"],
            RoomType::Office => &["desk", "office_chair", "bookshelf", "filing_cabinet", "plant", "trash_can"],
            RoomType::Dining => &["dining_table", "chair", "side_table", "plant", "bookshelf"],
        }
    }

    fn items(self) -> &'static [&'static str] {
        match self {
            RoomType::Living => &["book", "vase", "remote", "cup", "lamp", "box", "tv"],
            RoomType::Kitchen => &["bowl", "plate", "kettle", "bottle", "cup", "toaster", "microwave"],
            RoomType::Bedroom => &["lamp", "book", "alarm_clock", "pillow", "box", "vase"],
            RoomType::Bathroom => &["soap", "towel", "bottle", "box"],
            RoomType::Office => &["monitor", "laptop", "keyboard", "mug", "book", "lamp"],
            RoomType::Dining => &["plate", "bowl", "cup", "vase", "bottle"],
        }
    }
}

/// Axis-aligned xy rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    fn inset(&self, d: f64) -> Rect {
        Rect { x0: self.x0 + d, y0: self.y0 + d, x1: self.x1 - d, y1: self.y1 - d }
    }

    fn intersects(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    fn contains(&self, o: &Rect) -> bool {
        o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1
    }
}

fn footprint_rect(b: &OrientedBox) -> Rect {
    let (lo, hi) = b.aabb();
    Rect { x0: lo.x, y0: lo.y, x1: hi.x, y1: hi.y }
}

struct Room {
    rect: Rect,
    kind: RoomType,
}

struct Layout {
    width: f64,
    depth: f64,
    rooms: Vec<Room>,
    walls: Vec<OrientedBox>,
    /// Clear zones in front of doorways where no furniture goes.
    keep_clear: Vec<Rect>,
    main_room: usize,
}

/// Wall along x at height `y` from `x0` to `x1`, cut by door intervals.
fn wall_x(walls: &mut Vec<OrientedBox>, y: f64, x0: f64, x1: f64, doors: &[(f64, f64)]) {
    for (a, b) in split_span(x0, x1, doors) {
        walls.push(OrientedBox::axis_aligned(
            Vec3::new((a + b) / 2.0, y, WALL_HEIGHT / 2.0),
            Vec3::new((b - a) / 2.0, WALL_THICKNESS / 2.0, WALL_HEIGHT / 2.0),
        ));
    }
}

fn wall_y(walls: &mut Vec<OrientedBox>, x: f64, y0: f64, y1: f64, doors: &[(f64, f64)]) {
    for (a, b) in split_span(y0, y1, doors) {
        walls.push(OrientedBox::axis_aligned(
            Vec3::new(x, (a + b) / 2.0, WALL_HEIGHT / 2.0),
            Vec3::new(WALL_THICKNESS / 2.0, (b - a) / 2.0, WALL_HEIGHT / 2.0),
        ));
    }
}

fn split_span(lo: f64, hi: f64, doors: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut doors = doors.to_vec();
    doors.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut start = lo;
    for (a, b) in doors {
        if a > start + 1e-9 {
            out.push((start, a));
        }
        start = start.max(b);
    }
    if hi > start + 1e-9 {
        out.push((start, hi));
    }
    out
}

fn outer_walls(walls: &mut Vec<OrientedBox>, w: f64, d: f64) {
    let t = WALL_THICKNESS / 2.0;
    wall_x(walls, 0.0, -t, w + t, &[]);
    wall_x(walls, d, -t, w + t, &[]);
    wall_y(walls, 0.0, t, d - t, &[]);
    wall_y(walls, w, t, d - t, &[]);
}

fn room_layout(rng: &mut Stream) -> Layout {
    let width = rng.random_range(5.0..=7.0);
    let depth = rng.random_range(4.0..=6.0);
    let kinds = [RoomType::Living, RoomType::Bedroom, RoomType::Office, RoomType::Kitchen, RoomType::Dining];
    let kind = kinds[rng.random_range(0..kinds.len())];
    let mut walls = Vec::new();
    outer_walls(&mut walls, width, depth);
    Layout {
        width,
        depth,
        rooms: alloc::vec![Room { rect: Rect { x0: 0.0, y0: 0.0, x1: width, y1: depth }, kind }],
        walls,
        keep_clear: Vec::new(),
        main_room: 0,
    }
}

/// Door interval of width [`DOOR_WIDTH`] inside `[lo, hi]`, away from the span ends.
fn door_in(rng: &mut Stream, lo: f64, hi: f64) -> (f64, f64) {
    let margin = 0.4;
    let c = rng.random_range(lo + margin + DOOR_WIDTH / 2.0..=hi - margin - DOOR_WIDTH / 2.0);
    (c - DOOR_WIDTH / 2.0, c + DOOR_WIDTH / 2.0)
}

/// Splits `[0, len]` into `n` spans of at least `min` each.
fn split_strip(rng: &mut Stream, len: f64, n: usize, min: f64) -> Vec<f64> {
    let spare = len - min * n as f64;
    let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w = min + spare * *w / total;
    }
    let mut cuts = alloc::vec![0.0];
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cuts.push(acc);
    }
    cuts[n] = len;
    cuts
}

fn apartment_layout(rng: &mut Stream) -> Layout {
    let width = rng.random_range(12.0..=14.0);
    let depth = rng.random_range(9.0..=10.0);
    let split_y = depth * rng.random_range(0.45..=0.55);
    let n_bottom = rng.random_range(2..=3usize);
    let n_top = rng.random_range(2..=3usize);
    let bottom = split_strip(rng, width, n_bottom, 3.5);
    let top = split_strip(rng, width, n_top, 3.5);

    let mut walls = Vec::new();
    outer_walls(&mut walls, width, depth);
    let mut keep_clear = Vec::new();
    let clear = |doors: &[(f64, f64)], keep: &mut Vec<Rect>, horizontal: bool, at: f64| {
        for &(a, b) in doors {
            keep.push(if horizontal {
                Rect { x0: a - 0.1, y0: at - 0.9, x1: b + 0.1, y1: at + 0.9 }
            } else {
                Rect { x0: at - 0.9, y0: a - 0.1, x1: at + 0.9, y1: b + 0.1 }
            });
        }
    };

    // one door from every top room into the bottom strip
    let t = WALL_THICKNESS / 2.0;
    let mut doors = Vec::new();
    for i in 0..n_top {
        doors.push(door_in(rng, top[i], top[i + 1]));
    }
    clear(&doors, &mut keep_clear, true, split_y);
    wall_x(&mut walls, split_y, t, width - t, &doors);
    // bottom rooms are chained by doors; top rooms are closed off from each other
    for i in 1..n_bottom {
        let d = [door_in(rng, 0.0, split_y)];
        clear(&d, &mut keep_clear, false, bottom[i]);
        wall_y(&mut walls, bottom[i], t, split_y - t, &d);
    }
    for i in 1..n_top {
        wall_y(&mut walls, top[i], split_y + t, depth - t, &[]);
    }

    let mut rooms: Vec<Room> = Vec::new();
    for i in 0..n_bottom {
        rooms.push(Room { rect: Rect { x0: bottom[i], y0: 0.0, x1: bottom[i + 1], y1: split_y }, kind: RoomType::Living });
    }
    for i in 0..n_top {
        rooms.push(Room { rect: Rect { x0: top[i], y0: split_y, x1: top[i + 1], y1: depth }, kind: RoomType::Living });
    }
    let main_room = (0..rooms.len())
        .max_by(|&a, &b| rooms[a].rect.area().total_cmp(&rooms[b].rect.area()).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut others = alloc::vec![RoomType::Kitchen, RoomType::Bedroom, RoomType::Bathroom, RoomType::Office, RoomType::Dining];
    for (i, room) in rooms.iter_mut().enumerate() {
        if i != main_room {
            let pick = rng.random_range(0..others.len());
            room.kind = others.remove(pick);
        }
    }
    Layout { width, depth, rooms, walls, keep_clear, main_room }
}

fn jittered_half(rng: &mut Stream, s: &LabelSpec) -> Vec3 {
    let mut h = Vec3::new(
        s.half[0] * rng.random_range(0.85..=1.1),
        s.half[1] * rng.random_range(0.85..=1.1),
        s.half[2] * rng.random_range(0.9..=1.1),
    );
    let diag = h.norm();
    if diag > MAX_HALF_DIAGONAL {
        h = h * (MAX_HALF_DIAGONAL / diag);
    }
    h
}

struct Placed {
    label: &'static str,
    bbox: OrientedBox,
    room: usize,
    /// Items resting on this object (footprints), when it is a support.
    load: Vec<Rect>,
}

fn try_place_floor(rng: &mut Stream, layout: &Layout, room: usize, label: &'static str, placed: &[Placed]) -> Option<OrientedBox> {
    let s = lookup(label);
    let half = jittered_half(rng, s);
    let inner = layout.rooms[room].rect.inset(WALL_THICKNESS / 2.0 + 0.05);
    for _ in 0..60 {
        let quarter = rng.random_range(0..4u32) as f64 * FRAC_PI_2;
        let yaw = quarter + rng.random_range(-0.15..=0.15);
        let against_wall = rng.random_bool(0.5);
        let (cx, cy) = if against_wall {
            // back to one of the four walls, facing into the room
            let ext = if quarter as u32 % 2 == 0 { (half.x, half.y) } else { (half.y, half.x) };
            match rng.random_range(0..4u32) {
                0 => (rng.random_range(inner.x0..=inner.x1), inner.y0 + ext.1 + 0.05),
                1 => (rng.random_range(inner.x0..=inner.x1), inner.y1 - ext.1 - 0.05),
                2 => (inner.x0 + ext.0 + 0.05, rng.random_range(inner.y0..=inner.y1)),
                _ => (inner.x1 - ext.0 - 0.05, rng.random_range(inner.y0..=inner.y1)),
            }
        } else {
            (rng.random_range(inner.x0..=inner.x1), rng.random_range(inner.y0..=inner.y1))
        };
        let bbox = OrientedBox::new(Vec3::new(cx, cy, half.z), half, yaw);
        let fp = footprint_rect(&bbox);
        if !inner.contains(&fp) {
            continue;
        }
        let padded = fp.inset(-0.1);
        if layout.keep_clear.iter().any(|k| k.intersects(&padded)) {
            continue;
        }
        if placed.iter().any(|p| footprint_rect(&p.bbox).intersects(&padded)) {
            continue;
        }
        return Some(bbox);
    }
    None
}

fn try_place_item(rng: &mut Stream, support: &Placed, label: &'static str) -> Option<(OrientedBox, Rect)> {
    let s = lookup(label);
    let half = jittered_half(rng, s);
    let sb = &support.bbox;
    let margin = 0.02;
    let room_x = sb.half_extents.x - half.x - margin;
    let room_y = sb.half_extents.y - half.y - margin;
    if room_x <= 0.0 || room_y <= 0.0 {
        return None;
    }
    for _ in 0..12 {
        let local = Vec3::new(rng.random_range(-room_x..=room_x), rng.random_range(-room_y..=room_y), 0.0);
        let p = sb.to_world(local);
        let yaw = sb.yaw + rng.random_range(-0.3..=0.3);
        let bbox = OrientedBox::new(Vec3::new(p.x, p.y, sb.top_z() + half.z), half, yaw);
        let fp = footprint_rect(&bbox);
        if support.load.iter().any(|r| r.intersects(&fp)) {
            continue;
        }
        return Some((bbox, fp));
    }
    None
}

/// Distance from `(x, y)` to the footprint rectangle of `b` (0 inside).
fn point_footprint_distance(x: f64, y: f64, b: &OrientedBox) -> f64 {
    let local = b.to_local(Vec3::new(x, y, b.center.z));
    let dx = (local.x.abs() - b.half_extents.x).max(0.0);
    let dy = (local.y.abs() - b.half_extents.y).max(0.0);
    sqrt(dx * dx + dy * dy)
}

/// Cells at least [`NAV_CLEARANCE`] from every wall and floor-standing object, reduced to
/// the largest 4-connected component.
fn build_nav(width: f64, depth: f64, walls: &[OrientedBox], objects: &[WorldObject]) -> NavGrid {
    let nx = libm::ceil(width / NAV_RESOLUTION) as usize;
    let ny = libm::ceil(depth / NAV_RESOLUTION) as usize;
    let mut nav = NavGrid::new((0.0, 0.0), NAV_RESOLUTION, nx, ny);
    let blockers: Vec<&OrientedBox> = walls
        .iter()
        .chain(objects.iter().map(|o| &o.bbox).filter(|b| b.bottom_z() < 1e-6))
        .collect();
    for iy in 0..ny as i32 {
        for ix in 0..nx as i32 {
            let (x, y) = nav.cell_center((ix, iy));
            let ok = x > 0.0 && y > 0.0 && x < width && y < depth && blockers.iter().all(|b| point_footprint_distance(x, y, b) >= NAV_CLEARANCE);
            nav.set((ix, iy), ok);
        }
    }
    let mut comp = alloc::vec![usize::MAX; nx * ny];
    let mut best = (0usize, usize::MAX);
    let mut n_comp = 0;
    for start in nav.navigable_cells().collect::<Vec<_>>() {
        let si = start.1 as usize * nx + start.0 as usize;
        if comp[si] != usize::MAX {
            continue;
        }
        let mut size = 0;
        let mut q = VecDeque::from([start]);
        comp[si] = n_comp;
        while let Some(c) = q.pop_front() {
            size += 1;
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = (c.0 + dx, c.1 + dy);
                if nav.is_navigable(n) {
                    let ni = n.1 as usize * nx + n.0 as usize;
                    if comp[ni] == usize::MAX {
                        comp[ni] = n_comp;
                        q.push_back(n);
                    }
                }
            }
        }
        if best.1 == usize::MAX || size > best.0 {
            best = (size, n_comp);
        }
        n_comp += 1;
    }
    for iy in 0..ny as i32 {
        for ix in 0..nx as i32 {
            let i = iy as usize * nx + ix as usize;
            if nav.is_navigable((ix, iy)) && comp[i] != best.1 {
                nav.set((ix, iy), false);
            }
        }
    }
    nav
}

/// Cameras high in three corners of `rect`, looking at its center.
fn corner_cameras(rng: &mut Stream, rect: &Rect) -> Vec<ExternalCamera> {
    let r = rect.inset(0.3);
    let mut corners = alloc::vec![(r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)];
    let drop = rng.random_range(0..4);
    corners.remove(drop);
    let (cx, cy) = rect.center();
    corners
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| ExternalCamera {
            id: format!("ext{i}"),
            pose: Pose::look_at(Vec3::new(x, y, WALL_HEIGHT - 0.3), Vec3::new(cx, cy, 0.6)).expect("camera is not directly above its target"),
            intrinsics: external_intrinsics(),
        })
        .collect()
}

fn furnish(rng: &mut Stream, layout: &Layout, target: usize, floor_density: f64) -> Option<Vec<Placed>> {
    let mut placed: Vec<Placed> = Vec::new();
    for (ri, room) in layout.rooms.iter().enumerate() {
        let list = room.kind.furniture();
        let quota = ((room.rect.area() * floor_density) as usize).max(list.len().min(3));
        let mut count = 0;
        let mut tries = 0;
        while count < quota && tries < quota * 3 {
            let label = if tries < list.len() { list[tries] } else { list[rng.random_range(0..list.len())] };
            tries += 1;
            if let Some(bbox) = try_place_floor(rng, layout, ri, label, &placed) {
                placed.push(Placed { label, bbox, room: ri, load: Vec::new() });
                count += 1;
            }
        }
    }
    if placed.len() >= target {
        return None;
    }
    let supports: Vec<usize> = (0..placed.len()).filter(|&i| lookup(placed[i].label).kind == Kind::Support).collect();
    if supports.is_empty() {
        return None;
    }
    let mut items = Vec::new();
    let mut attempts = 0;
    while placed.len() + items.len() < target && attempts < 4000 {
        attempts += 1;
        let si = supports[rng.random_range(0..supports.len())];
        let list = layout.rooms[placed[si].room].kind.items();
        let label = list[rng.random_range(0..list.len())];
        if let Some((bbox, fp)) = try_place_item(rng, &placed[si], label) {
            placed[si].load.push(fp);
            items.push(Placed { label, bbox, room: placed[si].room, load: Vec::new() });
        }
    }
    placed.extend(items);
    (placed.len() == target).then_some(placed)
}

/// Deterministic world of `family` for `seed`.
pub fn generate(family: Family, seed: u64) -> Result<WorldSpec> {
    let (lo, hi) = family.object_range();
    for attempt in 0..32u64 {
        let mut rng = stream(seed, Purpose::WorldGen, attempt);
        let layout = match family {
            Family::Room => room_layout(&mut rng),
            Family::Apartment => apartment_layout(&mut rng),
        };
        let target = rng.random_range(lo..=hi);
        let density = match family {
            Family::Room => 0.5,
            Family::Apartment => 0.42,
        };
        let Some(placed) = furnish(&mut rng, &layout, target, density) else {
            continue;
        };
        let objects: Vec<WorldObject> = placed
            .iter()
            .enumerate()
            .map(|(i, p)| WorldObject { id: format!("o{i:03}"), label: String::from(p.label), bbox: p.bbox })
            .collect();
        let nav = build_nav(layout.width, layout.depth, &layout.walls, &objects);
        if nav.navigable_count() < 16 {
            continue;
        }
        let cameras = corner_cameras(&mut rng, &layout.rooms[layout.main_room].rect);
        return WorldSpec::new(objects, layout.walls, 0.0, nav, cameras);
    }
    Err(Error::InvalidWorld(format!("no valid {family} world for seed {seed}")))
}
