//! Yaw-oriented boxes, rays and the exact geometric tests the edge predicates are built on.
//!
//! Boxes rotate about world +z only, so every footprint is a rectangle in the xy-plane and
//! footprint overlap can be computed exactly by convex polygon clipping.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{atan2, cos, sin, Vec3};

/// Slack used by the closed containment test so that points produced by fitting a box
/// to them are not rejected because of rounding.
pub const CONTAINMENT_EPS: f64 = 1e-9;

/// Minimum half extent assigned along a degenerate axis by [`fit_obb`].
pub const MIN_HALF_EXTENT: f64 = 0.01;

/// Samples per axis of the deterministic lattice used by [`containment_ratio`].
pub const CONTAINMENT_LATTICE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3,
    /// Strictly positive half sizes along the box's local x, y, z axes.
    pub half_extents: Vec3,
    /// Rotation about world +z, radians.
    pub yaw: f64,
}

pub type Point2 = (f64, f64);

impl OrientedBox {
    pub fn new(center: Vec3, half_extents: Vec3, yaw: f64) -> Self {
        Self { center, half_extents, yaw }
    }

    pub fn axis_aligned(center: Vec3, half_extents: Vec3) -> Self {
        Self::new(center, half_extents, 0.0)
    }

    pub fn is_valid(&self) -> bool {
        let h = self.half_extents;
        h.x > 0.0 && h.y > 0.0 && h.z > 0.0 && h.is_finite() && self.center.is_finite() && self.yaw.is_finite()
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    pub fn footprint_area(&self) -> f64 {
        4.0 * self.half_extents.x * self.half_extents.y
    }

    pub fn bottom_z(&self) -> f64 {
        self.center.z - self.half_extents.z
    }

    pub fn top_z(&self) -> f64 {
        self.center.z + self.half_extents.z
    }

    /// Half-length of the box diagonal.
    pub fn half_diagonal(&self) -> f64 {
        self.half_extents.norm()
    }

    /// World point expressed in the box frame (origin at center, axes along the box).
    pub fn to_local(&self, p: Vec3) -> Vec3 {
        let d = p - self.center;
        let (s, c) = (sin(self.yaw), cos(self.yaw));
        Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    pub fn local_vector(&self, v: Vec3) -> Vec3 {
        let (s, c) = (sin(self.yaw), cos(self.yaw));
        Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
    }

    pub fn to_world(&self, local: Vec3) -> Vec3 {
        let (s, c) = (sin(self.yaw), cos(self.yaw));
        Vec3::new(c * local.x - s * local.y, s * local.x + c * local.y, local.z) + self.center
    }

    /// Footprint rectangle in counter-clockwise order, starting at local (-hx, -hy).
    pub fn footprint(&self) -> [Point2; 4] {
        let h = self.half_extents;
        let local = [(-h.x, -h.y), (h.x, -h.y), (h.x, h.y), (-h.x, h.y)];
        local.map(|(x, y)| {
            let w = self.to_world(Vec3::new(x, y, 0.0));
            (w.x, w.y)
        })
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn aabb(&self) -> (Vec3, Vec3) {
        let (s, c) = (sin(self.yaw).abs(), cos(self.yaw).abs());
        let h = self.half_extents;
        let ext = Vec3::new(c * h.x + s * h.y, s * h.x + c * h.y, h.z);
        (self.center - ext, self.center + ext)
    }

    /// Equivalent box with yaw in `[0, pi/2)`; extents are swapped per quarter turn.
    pub fn canonical(&self) -> OrientedBox {
        let quarter = core::f64::consts::FRAC_PI_2;
        let k = libm::floor(self.yaw / quarter);
        let mut yaw = self.yaw - k * quarter;
        if yaw >= quarter {
            yaw -= quarter;
        }
        if yaw < 0.0 {
            yaw = 0.0;
        }
        let odd = (k as i64).rem_euclid(2) == 1;
        let h = self.half_extents;
        let half_extents = if odd { Vec3::new(h.y, h.x, h.z) } else { h };
        OrientedBox::new(self.center, half_extents, yaw)
    }
}

fn aabbs_overlap(a: (Vec3, Vec3), b: (Vec3, Vec3)) -> bool {
    a.0.x <= b.1.x && b.0.x <= a.1.x && a.0.y <= b.1.y && b.0.y <= a.1.y && a.0.z <= b.1.z && b.0.z <= a.1.z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; `None` if it has no length.
    pub fn new(origin: Vec3, direction: Vec3) -> Option<Ray> {
        direction.normalized().map(|direction| Ray { origin, direction })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// The eight corners: bottom face counter-clockwise from local (-hx,-hy,-hz) seen from
/// above, then the top face in the same order.
pub fn obb_corners(b: &OrientedBox) -> [Vec3; 8] {
    let h = b.half_extents;
    let signs = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let mut out = [Vec3::ZERO; 8];
    for (level, sz) in [-1.0, 1.0].into_iter().enumerate() {
        for (i, (sx, sy)) in signs.iter().enumerate() {
            out[level * 4 + i] = b.to_world(Vec3::new(sx * h.x, sy * h.y, sz * h.z));
        }
    }
    out
}

/// Closed containment test (boundary counts as inside, with [`CONTAINMENT_EPS`] slack).
pub fn point_in_obb(p: Vec3, b: &OrientedBox) -> bool {
    let l = b.to_local(p);
    let h = b.half_extents;
    l.x.abs() <= h.x + CONTAINMENT_EPS && l.y.abs() <= h.y + CONTAINMENT_EPS && l.z.abs() <= h.z + CONTAINMENT_EPS
}

/// Signed area of a polygon (positive when counter-clockwise).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % poly.len()];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

/// Sutherland-Hodgman clipping of `subject` by the convex counter-clockwise polygon `clip`.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output: Vec<Point2> = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let side = |p: Point2| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let input = core::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    output
}

fn intersect(p: Point2, q: Point2, sp: f64, sq: f64) -> Point2 {
    let t = sp / (sp - sq);
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

/// Area of the intersection of the two footprints divided by the area of `a`'s footprint.
pub fn footprint_overlap(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (amin, amax) = a.aabb();
    let (bmin, bmax) = b.aabb();
    if amin.x > bmax.x || bmin.x > amax.x || amin.y > bmax.y || bmin.y > amax.y {
        return 0.0;
    }
    let inter = clip_convex(&a.footprint(), &b.footprint());
    (polygon_area(&inter) / a.footprint_area()).clamp(0.0, 1.0)
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (cx, cy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    crate::math::sqrt(cx * cx + cy * cy)
}

fn point_in_convex(p: Point2, poly: &[Point2]) -> bool {
    (0..poly.len()).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= -1e-12
    })
}

/// Smallest distance between the two footprint rectangles; 0 when they touch or overlap.
pub fn footprint_gap(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let fa = a.footprint();
    let fb = b.footprint();
    if fa.iter().any(|&p| point_in_convex(p, &fb)) || fb.iter().any(|&p| point_in_convex(p, &fa)) {
        return 0.0;
    }
    let edges_cross = (0..4).any(|i| {
        (0..4).any(|j| segments_intersect(fa[i], fa[(i + 1) % 4], fb[j], fb[(j + 1) % 4]))
    });
    if edges_cross {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            best = best.min(point_segment_distance(fa[i], fb[j], fb[(j + 1) % 4]));
            best = best.min(point_segment_distance(fb[i], fa[j], fa[(j + 1) % 4]));
        }
    }
    best
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let orient = |a: Point2, b: Point2, c: Point2| (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Fraction of `a`'s volume inside `b`, estimated on a fixed lattice of cell centers in `a`.
/// Exactly 1.0 when all corners of `a` lie in `b`.
pub fn containment_ratio(a: &OrientedBox, b: &OrientedBox) -> f64 {
    if obb_corners(a).iter().all(|&c| point_in_obb(c, b)) {
        return 1.0;
    }
    if !aabbs_overlap(a.aabb(), b.aabb()) {
        return 0.0;
    }
    let n = CONTAINMENT_LATTICE;
    let h = a.half_extents;
    let coord = |i: usize, half: f64| ((i as f64 + 0.5) / n as f64 * 2.0 - 1.0) * half;
    let mut inside = 0usize;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = a.to_world(Vec3::new(coord(i, h.x), coord(j, h.y), coord(k, h.z)));
                if point_in_obb(p, b) {
                    inside += 1;
                }
            }
        }
    }
    inside as f64 / (n * n * n) as f64
}

/// Nearest nonnegative distance at which `ray` meets the surface of `b`.
///
/// Slab test in the box frame. When the origin is inside the box the exit distance is
/// returned, so the reported point is always on the boundary.
pub fn ray_obb_intersect(ray: &Ray, b: &OrientedBox) -> Option<f64> {
    slab(b.to_local(ray.origin), b.local_vector(ray.direction), b.half_extents)
}

/// Slab test for a ray already expressed in the box frame.
pub(crate) fn slab(o: Vec3, d: Vec3, h: Vec3) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        let (oa, da, ha) = (o[axis], d[axis], h[axis]);
        if da.abs() < 1e-300 {
            if oa.abs() > ha {
                return None;
            }
            continue;
        }
        let t1 = (-ha - oa) / da;
        let t2 = (ha - oa) / da;
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        t_near = t_near.max(lo);
        t_far = t_far.min(hi);
        if t_near > t_far {
            return None;
        }
    }
    if t_far < 0.0 {
        None
    } else if t_near >= 0.0 {
        Some(t_near)
    } else {
        Some(t_far)
    }
}

/// Fits a yaw-oriented box to a point set.
///
/// Yaw comes from the principal axes of the xy coordinates, the z extent from min/max z.
/// Degenerate axes are widened to [`MIN_HALF_EXTENT`]. The result contains every input
/// point and is returned in canonical form (yaw in `[0, pi/2)`).
pub fn fit_obb(points: &[Vec3]) -> Result<OrientedBox> {
    if points.len() < 4 {
        return Err(Error::Unfittable("fewer than 4 points"));
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / n;
    let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
    let mut spread: f64 = 0.0;
    for p in points {
        let d = *p - mean;
        cxx += d.x * d.x;
        cxy += d.x * d.y;
        cyy += d.y * d.y;
        spread = spread.max(d.norm());
    }
    if !(spread > 1e-12) {
        return Err(Error::Unfittable("points have no spatial spread"));
    }
    let yaw = if (cxy / n).abs() < 1e-15 && ((cxx - cyy) / n).abs() < 1e-15 { 0.0 } else { 0.5 * atan2(2.0 * cxy, cxx - cyy) };
    let frame = OrientedBox::new(mean, Vec3::new(1.0, 1.0, 1.0), yaw);
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in points {
        let l = frame.to_local(*p);
        lo = lo.component_min(l);
        hi = hi.component_max(l);
    }
    let mid = (lo + hi) * 0.5;
    let half = (hi - lo) * 0.5;
    let half = Vec3::new(half.x.max(MIN_HALF_EXTENT), half.y.max(MIN_HALF_EXTENT), half.z.max(MIN_HALF_EXTENT));
    Ok(OrientedBox::new(frame.to_world(mid), half, yaw).canonical())
}

/// Like [`fit_obb`] but never fails: too-small or coincident inputs give an axis-aligned
/// box around the points with minimum half extents. `None` only for an empty input.
pub fn fit_obb_lenient(points: &[Vec3]) -> Option<OrientedBox> {
    if points.is_empty() {
        return None;
    }
    fit_obb(points).ok().or_else(|| {
        let (lo, hi) = points.iter().fold((points[0], points[0]), |(lo, hi), &p| (lo.component_min(p), hi.component_max(p)));
        let half = (hi - lo) * 0.5;
        Some(OrientedBox::axis_aligned(
            (lo + hi) * 0.5,
            Vec3::new(half.x.max(MIN_HALF_EXTENT), half.y.max(MIN_HALF_EXTENT), half.z.max(MIN_HALF_EXTENT)),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn unit_cube() -> OrientedBox {
        OrientedBox::axis_aligned(Vec3::ZERO, Vec3::new(0.5, 0.5, 0.5))
    }

    fn same_point_set(a: &[Vec3], b: &[Vec3], tol: f64) -> bool {
        a.iter().all(|p| b.iter().any(|q| p.distance(*q) < tol)) && b.iter().all(|p| a.iter().any(|q| p.distance(*q) < tol))
    }

    #[test]
    fn unit_cube_corners() {
        let c = obb_corners(&unit_cube());
        let mut expected = Vec::new();
        for z in [-0.5, 0.5] {
            for (x, y) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)] {
                expected.push(Vec3::new(x, y, z));
            }
        }
        assert_eq!(c.to_vec(), expected);
    }

    #[test]
    fn square_footprint_is_quarter_turn_symmetric() {
        let a = OrientedBox::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5), 0.0);
        let b = OrientedBox::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5), FRAC_PI_2);
        assert!(same_point_set(&obb_corners(&a), &obb_corners(&b), 1e-12));
    }

    #[test]
    fn point_just_outside_face() {
        let b = OrientedBox::new(Vec3::new(0.3, -1.0, 0.5), Vec3::new(0.4, 0.2, 0.3), 0.7);
        assert!(point_in_obb(b.center, &b));
        let eps = 1e-6;
        let dir = Vec3::new(cos(b.yaw), sin(b.yaw), 0.0);
        assert!(!point_in_obb(b.center + dir * (b.half_extents.x + eps), &b));
        assert!(point_in_obb(b.center + dir * (b.half_extents.x - eps), &b));
    }

    #[test]
    fn footprint_overlap_basic_cases() {
        let a = OrientedBox::new(Vec3::new(0.2, 0.1, 0.0), Vec3::new(0.5, 0.3, 0.2), 0.4);
        assert!((footprint_overlap(&a, &a) - 1.0).abs() < 1e-12);
        let far = OrientedBox::axis_aligned(Vec3::new(10.0, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5));
        assert_eq!(footprint_overlap(&unit_cube(), &far), 0.0);
        let shifted = OrientedBox::axis_aligned(Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5));
        assert!((footprint_overlap(&unit_cube(), &shifted) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn containment_cases() {
        let big = OrientedBox::axis_aligned(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.0));
        let small = OrientedBox::new(Vec3::new(0.1, 0.2, 0.0), Vec3::new(0.3, 0.2, 0.1), 0.3);
        assert_eq!(containment_ratio(&small, &big), 1.0);
        let far = OrientedBox::axis_aligned(Vec3::new(9.0, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5));
        assert_eq!(containment_ratio(&small, &far), 0.0);
        // straddles the +x face of `big` symmetrically
        let straddle = OrientedBox::axis_aligned(Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5));
        let r = containment_ratio(&straddle, &big);
        assert!((r - 0.5).abs() <= 1.0 / CONTAINMENT_LATTICE as f64, "{r}");
    }

    #[test]
    fn ray_into_unit_cube() {
        let ray = Ray::new(Vec3::new(0.0, 0.0, -5.0), Vec3::Z).unwrap();
        assert!((ray_obb_intersect(&ray, &unit_cube()).unwrap() - 4.5).abs() < 1e-15);
        let away = Ray::new(Vec3::new(0.0, 0.0, -5.0), -Vec3::Z).unwrap();
        assert_eq!(ray_obb_intersect(&away, &unit_cube()), None);
        let inside = Ray::new(Vec3::ZERO, Vec3::X).unwrap();
        assert!((ray_obb_intersect(&inside, &unit_cube()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fit_flat_points_uses_min_half_extent() {
        let pts = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 0.5, 1.0),
            Vec3::new(0.0, 0.5, 1.0),
        ];
        let b = fit_obb(&pts).unwrap();
        assert!((b.half_extents.z - MIN_HALF_EXTENT).abs() < 1e-15);
        assert!((b.center - Vec3::new(0.5, 0.25, 1.0)).norm() < 1e-9);
        assert!(pts.iter().all(|p| point_in_obb(*p, &b)));
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(fit_obb(&[p; 6]), Err(Error::Unfittable(_))));
        assert!(matches!(fit_obb(&[p, p + Vec3::X, p + Vec3::Y]), Err(Error::Unfittable(_))));
        assert!(fit_obb_lenient(&[p]).is_some());
        assert!(fit_obb_lenient(&[]).is_none());
    }

    #[test]
    fn footprint_gap_cases() {
        let a = OrientedBox::axis_aligned(Vec3::ZERO, Vec3::new(0.5, 0.5, 0.5));
        let b = OrientedBox::axis_aligned(Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.5));
        assert!((footprint_gap(&a, &b) - 1.0).abs() < 1e-12);
        assert_eq!(footprint_gap(&a, &a), 0.0);
        let c = OrientedBox::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 0.05, 0.5), 0.8);
        let d = OrientedBox::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 0.05, 0.5), -0.8);
        assert_eq!(footprint_gap(&c, &d), 0.0);
    }

    #[test]
    fn canonical_preserves_corners() {
        for yaw in [-3.0, -1.6, -0.2, 0.0, 1.0, FRAC_PI_2, 2.5, 7.0] {
            let b = OrientedBox::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.7, 0.2, 0.4), yaw);
            let c = b.canonical();
            assert!((0.0..FRAC_PI_2).contains(&c.yaw), "{yaw} -> {}", c.yaw);
            assert!(same_point_set(&obb_corners(&b), &obb_corners(&c), 1e-9));
        }
    }
}
