//! Planar primitives: points, segments, polygons with holes, line
//! intersection, triangle solving and the "opposite" map used by the
//! concave engines.
//!
//! Tolerances are scale relative so that every decision made here is
//! invariant under a uniform rescaling of the input.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parallelism threshold, normalized by the squared length scale.
pub const TAU_PAR: f64 = 1e-12;
/// Degenerate-length threshold, relative to the length scale.
pub const TAU_DEG: f64 = 1e-12;
/// Angular threshold used when classifying triangles.
pub const TAU_ANG: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2-D cross product.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn unit(self) -> Point {
        self * (1.0 / self.norm())
    }

    /// Counterclockwise rotation by `angle` about the origin.
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Twice the signed area of the triangle `a, b, c` (positive when counterclockwise).
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Diagonal of the axis-aligned bounding box of `pts`.
pub fn length_scale(pts: &[Point]) -> f64 {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if pts.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Result<Self> {
        let scale = length_scale(&[p, q]).max(p.norm()).max(q.norm());
        if p.dist(q) <= TAU_DEG * scale || p.dist(q) == 0.0 {
            return Err(Error::DegenerateSegment);
        }
        Ok(Segment { p, q })
    }

    pub fn length(&self) -> f64 {
        self.p.dist(self.q)
    }

    pub fn direction(&self) -> Point {
        (self.q - self.p).unit()
    }

    pub fn at(&self, t: f64) -> Point {
        self.p.lerp(self.q, t)
    }
}

/// Intersection `O` of the supporting lines of `AA'` and `BB'`.
pub fn intersect_lines(a: Point, a2: Point, b: Point, b2: Point) -> Result<Point> {
    let scale = length_scale(&[a, a2, b, b2]);
    let da = a2 - a;
    let db = b2 - b;
    if da.norm() <= TAU_DEG * scale || db.norm() <= TAU_DEG * scale || scale == 0.0 {
        return Err(Error::DegenerateSegment);
    }
    let den = da.cross(db);
    if den.abs() <= TAU_PAR * scale * scale {
        return Err(Error::ParallelLines);
    }
    let det_a = a.cross(a2);
    let det_b = b.cross(b2);
    Ok(Point::new(
        (da.x * det_b - det_a * db.x) / den,
        (da.y * det_b - det_a * db.y) / den,
    ))
}

/// Angle in `[0, π]` between the directions `A→A'` and `B→B'`.
pub fn angle_between(a: Point, a2: Point, b: Point, b2: Point) -> Result<f64> {
    let scale = length_scale(&[a, a2, b, b2]);
    let da = a2 - a;
    let db = b2 - b;
    if da.norm() <= TAU_DEG * scale || db.norm() <= TAU_DEG * scale || scale == 0.0 {
        return Err(Error::DegenerateSegment);
    }
    Ok(vector_angle(da, db))
}

/// Angle between two nonzero vectors. The arccos form loses all accuracy
/// near 0 and π, so the cross/dot pair is used instead.
pub(crate) fn vector_angle(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v))
}

/// A triangle given by two sides and the included angle, completed by the
/// cosine theorem. `alpha` is opposite `a`, `beta` opposite `b`, `gamma`
/// opposite `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleSides {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub area: f64,
}

pub fn solve_triangle(a: f64, b: f64, gamma: f64) -> Result<TriangleSides> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::DegenerateInput(format!("side lengths {a}, {b}")));
    }
    if !(gamma > 0.0 && gamma < PI) {
        return Err(Error::DegenerateInput(format!("included angle {gamma}")));
    }
    Ok(solve_triangle_unchecked(a, b, gamma))
}

pub(crate) fn solve_triangle_unchecked(a: f64, b: f64, gamma: f64) -> TriangleSides {
    let (sg, cg) = gamma.sin_cos();
    let half = (0.5 * gamma).sin();
    // (a-b)^2 + 4ab sin^2(γ/2) stays accurate for small γ.
    let c = ((a - b) * (a - b) + 4.0 * a * b * half * half).sqrt();
    let alpha = (a * sg).atan2(b - a * cg);
    let beta = (b * sg).atan2(a - b * cg);
    TriangleSides {
        a,
        b,
        c,
        alpha,
        beta,
        gamma,
        area: 0.5 * a * b * sg,
    }
}

impl TriangleSides {
    /// Triangle spanned by three points. Labels are assigned so that `c`
    /// is the longest side.
    pub fn from_points(p: Point, q: Point, r: Point) -> Result<Self> {
        let pts = [p, q, r];
        // side i is opposite vertex i
        let lens = [q.dist(r), r.dist(p), p.dist(q)];
        let far = (0..3)
            .max_by(|&i, &j| lens[i].total_cmp(&lens[j]))
            .unwrap_or(2);
        let apex = pts[far];
        let u = pts[(far + 1) % 3] - apex;
        let v = pts[(far + 2) % 3] - apex;
        let scale = length_scale(&pts);
        if orient(p, q, r).abs() <= TAU_PAR * scale * scale {
            return Err(Error::DegenerateInput("collinear triangle".into()));
        }
        // a, b are the sides adjacent to the apex
        solve_triangle(v.norm(), u.norm(), vector_angle(u, v))
    }

    pub fn perimeter(&self) -> f64 {
        self.a + self.b + self.c
    }

    /// Heights onto sides a, b and c.
    pub fn heights(&self) -> [f64; 3] {
        [
            2.0 * self.area / self.a,
            2.0 * self.area / self.b,
            2.0 * self.area / self.c,
        ]
    }
}

/// Position `y` (distance from `O` along `w`) of the point on the target line
/// that is collinear with `V` and the source point `O + x·v`.
///
/// `D` is the target endpoint nearer `O`; `w` points from `O` through `D`.
pub fn opposite(x: f64, vertex: Point, o: Point, v: Point, d: Point, w: Point) -> Result<f64> {
    let p = o + v * x - vertex;
    let den = p.cross(w);
    if den.abs() <= TAU_PAR * p.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::LineThroughVertexParallel);
    }
    Ok((d - o).dot(w) - p.cross(d - vertex) / den)
}

/// Parallel-sides variant of [`opposite`]. `x` is measured from the source
/// endpoint `b` along `v`; the result is measured along `v` from the foot of
/// the perpendicular dropped from `b` onto the target line through `d`.
pub fn opposite_parallel(x: f64, b: Point, v: Point, vertex: Point, d: Point) -> Result<f64> {
    let p = v * x - (vertex - b);
    let den = p.cross(v);
    if den.abs() <= TAU_PAR * p.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::LineThroughVertexParallel);
    }
    Ok((d - b).dot(v) - p.cross(d - vertex) / den)
}

/// Counterclockwise convex hull with collinear points removed. Fully
/// collinear input yields its two extreme points.
pub fn convex_cover(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let scale = length_scale(&pts);
    let eps = TAU_PAR * scale * scale;
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

/// One directed boundary edge. `ring` 0 is the outer ring, `ring` k ≥ 1 is
/// hole k-1; `index` is the position of the edge inside its ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub a: Point,
    pub b: Point,
    pub ring: usize,
    pub index: usize,
}

impl Edge {
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

/// A validated polygon: simple counterclockwise outer ring and clockwise
/// holes strictly inside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    outer: Vec<Point>,
    #[serde(default)]
    holes: Vec<Vec<Point>>,
}

fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| ring[i].cross(ring[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

fn clean_ring(mut ring: Vec<Point>, scale: f64) -> Vec<Point> {
    let tol = TAU_DEG * scale;
    ring.dedup_by(|a, b| a.dist(*b) <= tol);
    while ring.len() > 1 && ring[0].dist(ring[ring.len() - 1]) <= tol {
        ring.pop();
    }
    ring
}

/// Closed-segment intersection test with a relative tolerance.
pub(crate) fn segments_touch(p1: Point, p2: Point, q1: Point, q2: Point, eps: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d.abs() <= eps
            && c.x >= a.x.min(b.x) - eps.sqrt()
            && c.x <= a.x.max(b.x) + eps.sqrt()
            && c.y >= a.y.min(b.y) - eps.sqrt()
            && c.y <= a.y.max(b.y) + eps.sqrt()
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Reorient and check raw rings: outer becomes counterclockwise, holes
/// clockwise; every ring must be simple and the holes disjoint and inside.
pub fn validate_polygon(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Polygon> {
    let all: Vec<Point> = outer.iter().chain(holes.iter().flatten()).copied().collect();
    if all.iter().any(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput("non-finite coordinate".into()));
    }
    let scale = length_scale(&all);
    let mut rings: Vec<Vec<Point>> = std::iter::once(outer).chain(holes).collect();
    for (k, ring) in rings.iter_mut().enumerate() {
        *ring = clean_ring(std::mem::take(ring), scale);
        if ring.len() < 3 {
            return Err(Error::TooFewVertices { ring: k });
        }
        if (k == 0) != (signed_area(ring) > 0.0) {
            ring.reverse();
        }
    }

    let eps = TAU_PAR * scale * scale;
    let edges: Vec<(usize, usize, Point, Point)> = rings
        .iter()
        .enumerate()
        .flat_map(|(k, r)| (0..r.len()).map(move |i| (k, i, r[i], r[(i + 1) % r.len()])))
        .collect();
    for (m, &(ki, i, a, b)) in edges.iter().enumerate() {
        for &(kj, j, c, d) in &edges[m + 1..] {
            let n = rings[ki].len();
            let adjacent = ki == kj && (j == (i + 1) % n || i == (j + 1) % n);
            if adjacent {
                // only the shared vertex may be common; reject fold-backs
                let (shared, p_far, q_far) = if b == c { (b, a, d) } else { (a, b, c) };
                let u = p_far - shared;
                let v = q_far - shared;
                if u.cross(v).abs() <= eps && u.dot(v) > 0.0 {
                    return Err(Error::SelfIntersecting {
                        ring: ki,
                        first: i,
                        second: j,
                    });
                }
                continue;
            }
            if segments_touch(a, b, c, d, eps) {
                if ki != kj && ki == 0 {
                    return Err(Error::HoleOutsideOuter { hole: kj - 1 });
                }
                return Err(Error::SelfIntersecting {
                    ring: ki,
                    first: i,
                    second: j,
                });
            }
        }
    }
    for (k, ring) in rings.iter().enumerate() {
        if signed_area(ring).abs() <= TAU_PAR * scale * scale {
            return Err(Error::DegenerateInput(format!("ring {k} has zero area")));
        }
    }
    for h in 1..rings.len() {
        if !rings[h].iter().all(|&p| point_in_ring(p, &rings[0])) {
            return Err(Error::HoleOutsideOuter { hole: h - 1 });
        }
        for g in 1..rings.len() {
            if g != h && point_in_ring(rings[h][0], &rings[g]) {
                return Err(Error::HoleOutsideOuter { hole: h - 1 });
            }
        }
    }
    let outer = rings.remove(0);
    Ok(Polygon {
        outer,
        holes: rings,
    })
}

impl Polygon {
    /// Convenience constructor for a hole-free polygon.
    pub fn new(outer: Vec<Point>) -> Result<Self> {
        validate_polygon(outer, Vec::new())
    }

    pub fn with_holes(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self> {
        validate_polygon(outer, holes)
    }

    pub fn from_coords(outer: &[[f64; 2]]) -> Result<Self> {
        Polygon::new(outer.iter().map(|&c| c.into()).collect())
    }

    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.outer.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.rings().flatten().copied().collect()
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.rings()
            .enumerate()
            .flat_map(|(ring, r)| {
                (0..r.len()).map(move |index| Edge {
                    a: r[index],
                    b: r[(index + 1) % r.len()],
                    ring,
                    index,
                })
            })
            .collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().iter().map(Edge::length).sum()
    }

    /// Area of the outer ring minus the holes.
    pub fn area(&self) -> f64 {
        self.rings().map(signed_area).sum()
    }

    pub fn length_scale(&self) -> f64 {
        length_scale(&self.outer)
    }

    /// Largest vertex-to-vertex distance, which is also the longest chord.
    pub fn diameter(&self) -> f64 {
        let hull = convex_cover(&self.outer);
        let mut best: f64 = 0.0;
        for (i, p) in hull.iter().enumerate() {
            for q in &hull[i + 1..] {
                best = best.max(p.dist(*q));
            }
        }
        best
    }

    pub fn is_convex(&self) -> bool {
        if !self.holes.is_empty() {
            return false;
        }
        let n = self.outer.len();
        let s = self.length_scale();
        (0..n).all(|i| {
            orient(self.outer[i], self.outer[(i + 1) % n], self.outer[(i + 2) % n])
                >= -TAU_PAR * s * s
        })
    }

    /// Even-odd containment over all rings.
    pub fn contains(&self, p: Point) -> bool {
        self.rings().filter(|r| point_in_ring(p, r)).count() % 2 == 1
    }

    /// Apply a point map to every vertex and revalidate (reflections flip
    /// orientation, which validation repairs).
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Polygon> {
        validate_polygon(
            self.outer.iter().map(|&p| f(p)).collect(),
            self.holes
                .iter()
                .map(|h| h.iter().map(|&p| f(p)).collect())
                .collect(),
        )
    }
}
