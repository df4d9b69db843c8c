//! Planar geometry used by the metrics: vectors, convex polygons,
//! Sutherland-Hodgman clipping and arc-length parameterised polylines.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not convex")]
    NotConvex,
}

/// 2-D point or vector in map coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing at `angle` radians (counterclockwise from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Left-hand normal (rotated +90°).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > EPS).then(|| self * (1.0 / n))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec2>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = Aabb { min: first, max: first };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn intersects(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }
}

/// Simple polygon stored counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    /// Builds a polygon, reversing the vertex order if it was given clockwise.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    /// Rectangle centered at `center` whose long axis follows `direction`.
    pub fn oriented_rect(center: Vec2, direction: Vec2, half_length: f64, half_width: f64) -> Self {
        let d = direction.normalized().unwrap_or(Vec2::new(1.0, 0.0));
        let n = d.perp();
        let (l, w) = (d * half_length, n * half_width);
        Self {
            vertices: vec![center - l - w, center + l - w, center + l + w, center - l + w],
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices).expect("polygon has vertices")
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / n)
    }

    /// True when every turn has the same orientation (collinear runs allowed).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let scale = self.bbox().max.distance(self.bbox().min).max(1.0);
        let tol = 1e-9 * scale * scale;
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -tol
        })
    }

    /// Point-in-polygon test for convex polygons (boundary counts as inside).
    pub fn contains_convex(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= 0.0
        })
    }
}

/// Shoelace signed area; positive for counterclockwise order.
pub fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
    0.5 * twice
}

/// Clips `subject` against the left half-plane of the directed edge a→b.
fn clip_halfplane(subject: &[Vec2], a: Vec2, b: Vec2, out: &mut Vec<Vec2>) {
    out.clear();
    let n = subject.len();
    let edge = b - a;
    for i in 0..n {
        let s = subject[i];
        let e = subject[(i + 1) % n];
        let sd = edge.cross(s - a);
        let ed = edge.cross(e - a);
        let (s_in, e_in) = (sd >= 0.0, ed >= 0.0);
        if s_in != e_in {
            let denom = sd - ed;
            if denom.abs() > 1e-300 {
                let t = sd / denom;
                out.push(s + (e - s) * t);
            }
        }
        if e_in {
            out.push(e);
        }
    }
}

/// Intersection polygon of a subject polygon with a convex counterclockwise clip polygon.
pub fn clip_convex(subject: &Polygon, clip: &Polygon) -> Vec<Vec2> {
    let mut current = subject.vertices.clone();
    let mut scratch = Vec::with_capacity(current.len() + 4);
    let c = &clip.vertices;
    for i in 0..c.len() {
        clip_halfplane(&current, c[i], c[(i + 1) % c.len()], &mut scratch);
        std::mem::swap(&mut current, &mut scratch);
        if current.len() < 3 {
            return Vec::new();
        }
    }
    current
}

/// Intersection area of two convex polygons without validating convexity.
pub fn convex_overlap_area(p: &Polygon, q: &Polygon) -> f64 {
    if !p.bbox().intersects(&q.bbox()) {
        return 0.0;
    }
    signed_area(&clip_convex(p, q)).abs()
}

/// Area of the intersection of two convex polygons; 0 when disjoint.
pub fn overlap_area(p: &Polygon, q: &Polygon) -> Result<f64, GeometryError> {
    if !p.is_convex() || !q.is_convex() {
        return Err(GeometryError::NotConvex);
    }
    Ok(convex_overlap_area(p, q))
}

/// Crossing of two segments p0→p1 and q0→q1 as segment parameters (s, u) in [0,1].
/// Parallel and collinear segments report no crossing.
pub fn segment_intersection(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.cross(s);
    if denom.abs() <= EPS * r.norm().max(1.0) * s.norm().max(1.0) {
        return None;
    }
    let qp = q0 - p0;
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some((t, u))
}

/// First crossing of two polylines, reported from the first polyline's point of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub point: Vec2,
    pub arc_first: f64,
    pub arc_second: f64,
    pub tangent_first: Vec2,
    pub tangent_second: Vec2,
}

/// Polyline with cumulative arc length. Consecutive duplicate points are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
    bbox: Option<Aabb>,
}

impl Polyline {
    pub fn new(points: impl IntoIterator<Item = Vec2>) -> Self {
        let mut pts: Vec<Vec2> = Vec::new();
        for p in points {
            if pts.last().is_none_or(|&last| last.distance(p) > 1e-9) {
                pts.push(p);
            }
        }
        let mut cumulative = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                acc += p.distance(pts[i - 1]);
            }
            cumulative.push(acc);
        }
        let bbox = Aabb::from_points(&pts);
        Self { points: pts, cumulative, bbox }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Arc length at which the polyline reaches its `index`-th stored point.
    pub fn arc_of_point(&self, index: usize) -> f64 {
        self.cumulative[index]
    }

    /// Point and unit tangent at `arc`. Past the last point the polyline
    /// is extended straight along its last direction; a polyline without
    /// any segment uses `fallback_direction`.
    pub fn point_at(&self, arc: f64, fallback_direction: Vec2) -> (Vec2, Vec2) {
        let fallback = fallback_direction.normalized().unwrap_or(Vec2::new(1.0, 0.0));
        match self.points.len() {
            0 => (fallback * arc, fallback),
            1 => (self.points[0] + fallback * arc, fallback),
            n => {
                let arc = arc.max(0.0);
                // index of the segment containing arc
                let seg = match self.cumulative.binary_search_by(|c| c.total_cmp(&arc)) {
                    Ok(i) => i.min(n - 2),
                    Err(i) => i.saturating_sub(1).min(n - 2),
                };
                let a = self.points[seg];
                let b = self.points[seg + 1];
                let len = self.cumulative[seg + 1] - self.cumulative[seg];
                let dir = (b - a) * (1.0 / len);
                (a + dir * (arc - self.cumulative[seg]), dir)
            }
        }
    }

    /// First crossing along `self` with `other`, if any.
    pub fn first_crossing(&self, other: &Polyline) -> Option<Crossing> {
        let (bb_a, bb_b) = (self.bbox?, other.bbox?);
        if !bb_a.intersects(&bb_b) || self.points.len() < 2 || other.points.len() < 2 {
            return None;
        }
        let other_boxes: Vec<Aabb> = other
            .points
            .windows(2)
            .map(|w| Aabb::from_points(w).expect("two points"))
            .collect();
        for (i, w) in self.points.windows(2).enumerate() {
            let seg_box = Aabb::from_points(w).expect("two points");
            if !seg_box.intersects(&bb_b) {
                continue;
            }
            let mut best: Option<(f64, usize, f64)> = None;
            for (j, ob) in other_boxes.iter().enumerate() {
                if !seg_box.intersects(ob) {
                    continue;
                }
                let (q0, q1) = (other.points[j], other.points[j + 1]);
                if let Some((t, u)) = segment_intersection(w[0], w[1], q0, q1) {
                    if best.is_none_or(|(bt, _, _)| t < bt) {
                        best = Some((t, j, u));
                    }
                }
            }
            if let Some((t, j, u)) = best {
                let seg_len = self.cumulative[i + 1] - self.cumulative[i];
                let other_len = other.cumulative[j + 1] - other.cumulative[j];
                return Some(Crossing {
                    point: w[0] + (w[1] - w[0]) * t,
                    arc_first: self.cumulative[i] + t * seg_len,
                    arc_second: other.cumulative[j] + u * other_len,
                    tangent_first: (w[1] - w[0]) * (1.0 / seg_len),
                    tangent_second: (other.points[j + 1] - other.points[j]) * (1.0 / other_len),
                });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, side: f64) -> Polygon {
        Polygon::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x0 + side, y0),
            Vec2::new(x0 + side, y0 + side),
            Vec2::new(x0, y0 + side),
        ])
        .unwrap()
    }

    #[test]
    fn unit_squares_offset_half() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(0.5, 0.0, 1.0);
        assert!((overlap_area(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        assert!((overlap_area(&b, &a).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_squares() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(3.0, 3.0, 1.0);
        assert_eq!(overlap_area(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn touching_squares_have_zero_overlap() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(1.0, 0.0, 1.0);
        assert!(overlap_area(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(signed_area(p.vertices()) > 0.0);
    }

    #[test]
    fn non_convex_rejected() {
        let dart = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(0.5, 1.0),
        ])
        .unwrap();
        let sq = square(0.0, 0.0, 1.0);
        assert_eq!(overlap_area(&dart, &sq), Err(GeometryError::NotConvex));
        assert_eq!(Polygon::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]), Err(GeometryError::TooFewVertices(2)));
    }

    #[test]
    fn oriented_rect_area() {
        let r = Polygon::oriented_rect(Vec2::new(3.0, -1.0), Vec2::from_angle(0.7), 2.0, 0.9);
        assert!((r.area() - 4.0 * 1.8).abs() < 1e-12);
        assert!(r.is_convex());
    }

    #[test]
    fn perpendicular_polylines_cross_at_origin() {
        let a = Polyline::new([Vec2::new(-10.0, 0.0), Vec2::new(10.0, 0.0)]);
        let b = Polyline::new([Vec2::new(0.0, -5.0), Vec2::new(0.0, 5.0)]);
        let c = a.first_crossing(&b).unwrap();
        assert!(c.point.norm() < 1e-12);
        assert!((c.arc_first - 10.0).abs() < 1e-12);
        assert!((c.arc_second - 5.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_polylines_do_not_cross() {
        let a = Polyline::new([Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)]);
        let b = Polyline::new([Vec2::new(0.0, 4.0), Vec2::new(10.0, 4.0)]);
        assert!(a.first_crossing(&b).is_none());
    }

    #[test]
    fn point_at_walks_corners_and_extends() {
        let l = Polyline::new([Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0), Vec2::new(5.0, 5.0)]);
        let (p, d) = l.point_at(8.0, Vec2::new(1.0, 0.0));
        assert!(p.distance(Vec2::new(5.0, 3.0)) < 1e-12);
        assert!(d.distance(Vec2::new(0.0, 1.0)) < 1e-12);
        let (p, _) = l.point_at(12.0, Vec2::new(1.0, 0.0));
        assert!(p.distance(Vec2::new(5.0, 7.0)) < 1e-12);
        let single = Polyline::new([Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)]);
        let (p, d) = single.point_at(2.0, Vec2::new(0.0, 2.0));
        assert!(p.distance(Vec2::new(1.0, 3.0)) < 1e-12);
        assert!(d.distance(Vec2::new(0.0, 1.0)) < 1e-12);
    }
}
