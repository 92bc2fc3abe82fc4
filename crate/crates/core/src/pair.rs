//! Densities of chords joining two segments: concurrent segments sharing an
//! endpoint, the general non-parallel pair by inclusion–exclusion along the
//! two rays from the intersection point, and the parallel pair.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{
    intersect_lines, length_scale, solve_triangle, solve_triangle_unchecked, vector_angle, Point,
    TriangleSides, TAU_DEG, TAU_PAR,
};
use crate::triangle::arc_term;

/// Chords crossing side `a` that are dominated by vertex B of the triangle
/// completed from `a`, `b` and `γ`. `h` is the height from B.
/// With `below` set, an `ℓ` exactly on a breakpoint takes the limit from
/// below instead of the H(0) = 0 value.
fn rho_ab(ell: f64, alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, c: f64, below: bool) -> f64 {
    let lt = |x: f64, y: f64| x < y || (below && x == y);
    let (sg, cg) = gamma.sin_cos();
    let h = a * sg;
    let pre = 0.5 / sg;
    let base = beta * cg + alpha.cos() * beta.sin();
    let foot = a * cg;
    let u = h / ell;
    if foot < 0.0 {
        // γ obtuse: the height from B lands behind C
        if lt(ell, a) {
            pre * base
        } else if ell > a && lt(ell, c) {
            let sa = alpha.sin();
            pre * ((arc_term(u) + sa * alpha.cos() - alpha) * cg + (u * u - sa * sa) * sg)
        } else {
            0.0
        }
    } else if foot > b {
        // α obtuse: the height from B lands beyond A
        if lt(ell, c) {
            pre * base
        } else if ell > c && lt(ell, a) {
            pre * ((arc_term(u) - gamma) * cg + (1.0 - u * u) * sg)
        } else {
            0.0
        }
    } else if lt(ell, h) {
        pre * base
    } else if ell > h {
        let arc = arc_term(u);
        let mut s = 0.0;
        if c > ell {
            s += (arc - alpha) * cg + u * u * sg - alpha.sin() * beta.cos();
        }
        if a > ell {
            s += (arc - gamma) * cg + (1.0 - u * u) * sg;
        }
        pre * s
    } else {
        0.0
    }
}

pub(crate) fn concurrent_eval(t: &TriangleSides, ell: f64) -> f64 {
    concurrent_eval_at(t, ell, false)
}

fn concurrent_eval_at(t: &TriangleSides, ell: f64, below: bool) -> f64 {
    let top = t.a.max(t.b).max(t.c);
    if !(ell < top || (below && ell == top)) {
        return 0.0;
    }
    rho_ab(ell, t.alpha, t.beta, t.gamma, t.a, t.b, t.c, below)
        + rho_ab(ell, t.beta, t.alpha, t.gamma, t.b, t.a, t.c, below)
}

/// Density of chords joining two segments of lengths `a` and `b` that meet
/// at a common endpoint with included angle `gamma`.
pub fn rho_concurrent(a: f64, b: f64, gamma: f64, ell: f64) -> Result<f64> {
    let t = solve_triangle(a, b, gamma)?;
    if !(ell.is_finite() && ell >= 0.0) {
        return Err(Error::DegenerateInput(format!("chord length {ell}")));
    }
    Ok(concurrent_eval(&t, ell))
}

/// Kinks of the concurrent density: the legs, the completing side and the
/// two heights dropped onto the legs.
pub(crate) fn concurrent_breakpoints(t: &TriangleSides) -> [f64; 5] {
    let s = t.gamma.sin();
    [t.a, t.b, t.c, t.a * s, t.b * s]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    General,
    Parallel,
    ConcurrentAtEndpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct ConcurrentTerm {
    sides: TriangleSides,
    coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
enum Compiled {
    Concurrent(Vec<ConcurrentTerm>),
    Parallel {
        d: f64,
        xa: (f64, f64),
        xb: (f64, f64),
    },
}

/// A pair of segments prepared for repeated density evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentPairConfig {
    pub a: Point,
    pub a2: Point,
    pub b: Point,
    pub b2: Point,
    pub class: PairClass,
    /// Intersection of the supporting lines, absent for parallel pairs.
    pub o: Option<Point>,
    pub gamma: f64,
    /// Distance between the supporting lines, zero unless parallel.
    pub d: f64,
    #[serde(skip)]
    compiled: Compiled,
}

/// The part of segment `p q` on one side of `o`, as distances from `o`
/// along a unit direction. Segments straddling `o` yield two rays.
fn rays_from(o: Point, p: Point, q: Point, tol: f64) -> Vec<(Point, f64, f64)> {
    let (dp, dq) = (p - o, q - o);
    let (np, nq) = (dp.norm(), dq.norm());
    if np <= tol {
        return vec![(dq * (1.0 / nq), 0.0, nq)];
    }
    if nq <= tol {
        return vec![(dp * (1.0 / np), 0.0, np)];
    }
    if dp.dot(dq) < 0.0 {
        return vec![(dp * (1.0 / np), 0.0, np), (dq * (1.0 / nq), 0.0, nq)];
    }
    let (near, far) = if np < nq { (np, nq) } else { (nq, np) };
    let dir = if np < nq { dq } else { dp };
    vec![(dir * (1.0 / dir.norm()), near, far)]
}

impl SegmentPairConfig {
    pub fn new(a: Point, a2: Point, b: Point, b2: Point) -> Result<Self> {
        let scale = length_scale(&[a, a2, b, b2]);
        let tol = TAU_DEG * scale;
        if a.dist(a2) <= tol || b.dist(b2) <= tol || scale == 0.0 {
            return Err(Error::DegenerateSegment);
        }
        let (u, w) = (a2 - a, b2 - b);
        if u.cross(w).abs() <= TAU_PAR * scale * scale {
            return Self::parallel(a, a2, b, b2);
        }
        let o = intersect_lines(a, a2, b, b2)?;
        let gamma = vector_angle(u, w);
        let mut terms = Vec::new();
        let mut endpoint = true;
        for (du, a1, a2l) in rays_from(o, a, a2, tol) {
            for (dw, b1, b2l) in rays_from(o, b, b2, tol) {
                endpoint &= a1 == 0.0 && b1 == 0.0;
                let g = vector_angle(du, dw);
                for (la, lb, sign) in [(a2l, b2l, 1.0), (a1, b2l, -1.0), (a2l, b1, -1.0), (a1, b1, 1.0)] {
                    if la > tol && lb > tol {
                        terms.push(ConcurrentTerm {
                            sides: solve_triangle_unchecked(la, lb, g),
                            coefficient: sign,
                        });
                    }
                }
            }
        }
        Ok(SegmentPairConfig {
            a,
            a2,
            b,
            b2,
            class: if endpoint {
                PairClass::ConcurrentAtEndpoint
            } else {
                PairClass::General
            },
            o: Some(o),
            gamma,
            d: 0.0,
            compiled: Compiled::Concurrent(terms),
        })
    }

    fn parallel(a: Point, a2: Point, b: Point, b2: Point) -> Result<Self> {
        let scale = length_scale(&[a, a2, b, b2]);
        let v = (a2 - a).unit();
        let d = (b - a).cross(v).abs();
        if d <= TAU_DEG * scale {
            return Err(Error::CoincidentLines);
        }
        let sorted = |p: f64, q: f64| if p <= q { (p, q) } else { (q, p) };
        let xa = sorted(0.0, (a2 - a).dot(v));
        let xb = sorted((b - a).dot(v), (b2 - a).dot(v));
        Ok(SegmentPairConfig {
            a,
            a2,
            b,
            b2,
            class: PairClass::Parallel,
            o: None,
            gamma: 0.0,
            d,
            compiled: Compiled::Parallel { d, xa, xb },
        })
    }

    /// Raw density, possibly slightly negative from round-off. Exactly on a
    /// breakpoint every term takes its limit from below, so the virtual
    /// breakpoints of the inclusion–exclusion terms cancel.
    pub(crate) fn eval_raw(&self, ell: f64) -> f64 {
        match &self.compiled {
            Compiled::Concurrent(terms) => terms
                .iter()
                .map(|t| t.coefficient * concurrent_eval_at(&t.sides, ell, true))
                .sum(),
            Compiled::Parallel { d, xa, xb } => parallel_eval(*d, *xa, *xb, ell),
        }
    }

    pub fn eval(&self, ell: f64) -> f64 {
        let v = self.eval_raw(ell);
        if v < -1e-9 {
            log::warn!("segment-pair density {v:e} at ℓ={ell} clamped to zero");
        }
        v.max(0.0)
    }

    /// Superset of the ℓ values where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.compiled {
            Compiled::Concurrent(terms) => {
                for t in terms {
                    out.extend(concurrent_breakpoints(&t.sides));
                }
            }
            Compiled::Parallel { d, xa, xb } => {
                out.push(*d);
                for p in [xa.0, xa.1] {
                    for q in [xb.0, xb.1] {
                        out.push(d.hypot(p - q));
                    }
                }
            }
        }
        out.retain(|x| *x > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Divergence points: the line distance of a parallel pair whose
    /// projections overlap.
    pub fn singular(&self) -> Option<f64> {
        match &self.compiled {
            Compiled::Parallel { d, xa, xb } => {
                let overlap = xa.1.min(xb.1) - xa.0.max(xb.0);
                (overlap > TAU_DEG * (xa.1 - xa.0).max(xb.1 - xb.0)).then_some(*d)
            }
            Compiled::Concurrent(_) => None,
        }
    }

    /// Longest chord joining the two segments.
    pub fn max_length(&self) -> f64 {
        [self.a, self.a2]
            .iter()
            .flat_map(|p| [self.b, self.b2].map(|q| p.dist(q)))
            .fold(0.0, f64::max)
    }
}

fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

fn parallel_eval(d: f64, xa: (f64, f64), xb: (f64, f64), ell: f64) -> f64 {
    if !(ell > d) {
        return 0.0;
    }
    let s = ((ell - d) * (ell + d)).sqrt();
    let overlap = hinge((xb.1 - s).min(xa.1) - (xb.0 - s).max(xa.0))
        + hinge((xb.1 + s).min(xa.1) - (xb.0 + s).max(xa.0));
    d * d / (ell * ell * s) * overlap
}

/// Density of chords joining two non-parallel segments.
pub fn rho_segments(a: Point, a2: Point, b: Point, b2: Point, ell: f64) -> Result<f64> {
    let cfg = SegmentPairConfig::new(a, a2, b, b2)?;
    if cfg.class == PairClass::Parallel {
        return Err(Error::ParallelLines);
    }
    Ok(cfg.eval(ell))
}

/// Density of chords joining two parallel segments.
pub fn rho_parallel(a: Point, a2: Point, b: Point, b2: Point, ell: f64) -> Result<f64> {
    let scale = length_scale(&[a, a2, b, b2]);
    if a.dist(a2) <= TAU_DEG * scale || b.dist(b2) <= TAU_DEG * scale || scale == 0.0 {
        return Err(Error::DegenerateSegment);
    }
    if (a2 - a).cross(b2 - b).abs() > TAU_PAR * scale * scale {
        return Err(Error::InvalidConfig("segments are not parallel".into()));
    }
    Ok(SegmentPairConfig::parallel(a, a2, b, b2)?.eval(ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use quadrature::double_exponential;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Chords between legs of lengths a, b at angle γ, integrated over the
    /// chord direction θ measured from leg a: the set of admissible θ for a
    /// given ℓ is an intersection of two explicit sine conditions.
    fn direction_oracle(a: f64, b: f64, gamma: f64, ell: f64) -> f64 {
        let sg = gamma.sin();
        let f = |t: f64| t.sin() * (t - gamma).sin() / sg;
        let ok = |t: f64| ell * (t - gamma).sin() < a * sg && ell * t.sin() < b * sg;
        // admissible set changes only where one condition is an equality
        let mut knots = vec![gamma, PI];
        for (k, off) in [(a * sg / ell, gamma), (b * sg / ell, 0.0)] {
            if k < 1.0 {
                let r = k.asin();
                for base in [r, PI - r] {
                    let t = base + off;
                    if t > gamma && t < PI {
                        knots.push(t);
                    }
                }
            }
        }
        knots.sort_by(f64::total_cmp);
        knots
            .windows(2)
            .filter(|w| ok(0.5 * (w[0] + w[1])))
            .map(|w| double_exponential::integrate(f, w[0], w[1], 1e-14).integral)
            .sum()
    }

    #[test]
    fn virtual_breakpoints_cancel() {
        // the piece starts at distance ℓ from the intersection point, a kink
        // of the inclusion–exclusion terms but not of the pair density
        let x0 = 6.0 / 7.0;
        let ell: f64 = 1.6;
        for (a, b) in [(1.6, 1.6114285714285714), (1.2, 1.6), (1.0, 1.2)] {
            let cfg = SegmentPairConfig::new(Point::new(a, 0.), Point::new(b, 0.), Point::new(0., x0), Point::new(0., 2.))
                .unwrap();
            let hi = b.min((ell * ell - x0 * x0).sqrt());
            let want = if hi > a { (hi * hi - a * a) / (2.0 * ell * ell) } else { 0.0 };
            assert!((cfg.eval(ell) - want).abs() < 1e-14, "[{a},{b}]: {} vs {want}", cfg.eval(ell));
        }
    }

    #[test]
    fn concurrent_matches_direction_oracle() {
        let cases = [
            (1.0, 1.0, FRAC_PI_2),
            (1.0, 0.3, 0.4),
            (0.3, 1.0, 0.4),
            (2.0, 0.5, 2.5),
            (0.7, 1.9, 1.9),
            (1.0, 1.0, 0.05),
        ];
        for (a, b, g) in cases {
            let c = solve_triangle(a, b, g).unwrap().c;
            for k in 1..200 {
                let ell = 1.05 * a.max(b).max(c) * k as f64 / 200.0;
                let got = rho_concurrent(a, b, g, ell).unwrap();
                let want = direction_oracle(a, b, g, ell);
                assert!((got - want).abs() < 1e-9, "a={a} b={b} γ={g} ℓ={ell}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn concurrent_examples() {
        assert_eq!(rho_concurrent(1.0, 1.0, FRAC_PI_2, 1.5).unwrap(), 0.0);
        assert!(rho_concurrent(1.0, 1.0, 0.0, 0.5).is_err());
        assert!(rho_concurrent(0.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn concurrent_total_matches_double_integral() {
        // ∫ρ dℓ against ∫∫ xy sin²γ / r³ dx dy over the unit square of legs
        let g = FRAC_PI_2;
        let t = solve_triangle(1.0, 1.0, g).unwrap();
        let mut knots: Vec<f64> = concurrent_breakpoints(&t).to_vec();
        knots.push(0.0);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let total: f64 = knots
            .windows(2)
            .map(|w| double_exponential::integrate(|l| concurrent_eval(&t, l), w[0], w[1], 1e-12).integral)
            .sum();
        let inner = |x: f64| {
            double_exponential::integrate(
                |y: f64| x * y / (x * x + y * y).powf(1.5),
                0.0,
                1.0,
                1e-13,
            )
            .integral
        };
        let double = double_exponential::integrate(inner, 0.0, 1.0, 1e-12).integral;
        assert_abs_diff_eq!(total, double, epsilon = 1e-6);
    }

    #[test]
    fn segments_examples() {
        let p = Point::new;
        let (a, a2, b, b2) = (p(1., 0.), p(2., 0.), p(0., 1.), p(0., 2.));
        assert_eq!(rho_segments(a, a2, b, b2, 1.3).unwrap(), 0.0);
        let v = rho_segments(a, a2, b, b2, 1.9).unwrap();
        let want = rho_concurrent(2.0, 2.0, FRAC_PI_2, 1.9).unwrap()
            - rho_concurrent(1.0, 2.0, FRAC_PI_2, 1.9).unwrap()
            - rho_concurrent(2.0, 1.0, FRAC_PI_2, 1.9).unwrap()
            + rho_concurrent(1.0, 1.0, FRAC_PI_2, 1.9).unwrap();
        assert_abs_diff_eq!(v, want, epsilon = 1e-15);
        // x ∈ [1, √(ℓ²-1)] with kernel x/ℓ² integrates to (ℓ²-2)/(2ℓ²)
        assert_abs_diff_eq!(v, 1.61 / 7.22, epsilon = 1e-12);
        // B at the intersection point: two of the four terms vanish
        let g = 1.1;
        let w = Point::polar(1.0, g);
        let v = rho_segments(p(0.5, 0.), p(1.5, 0.), p(0., 0.), w * 1.2, 0.9).unwrap();
        let want = rho_concurrent(1.5, 1.2, g, 0.9).unwrap() - rho_concurrent(0.5, 1.2, g, 0.9).unwrap();
        assert_abs_diff_eq!(v, want, epsilon = 1e-12);
        assert_eq!(
            rho_segments(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.), 1.2),
            Err(Error::ParallelLines)
        );
    }

    #[test]
    fn straddling_segment_is_split() {
        // a segment crossing the other line through O counts both halves
        let p = Point::new;
        let cfg = SegmentPairConfig::new(p(-1., 0.), p(1., 0.), p(0., 0.5), p(0., 2.)).unwrap();
        let left = SegmentPairConfig::new(p(-1., 0.), p(0., 0.), p(0., 0.5), p(0., 2.)).unwrap();
        let right = SegmentPairConfig::new(p(0., 0.), p(1., 0.), p(0., 0.5), p(0., 2.)).unwrap();
        for k in 1..50 {
            let ell = 2.3 * k as f64 / 50.0;
            assert_abs_diff_eq!(cfg.eval(ell), left.eval(ell) + right.eval(ell), epsilon = 1e-12);
        }
    }

    #[test]
    fn parallel_examples() {
        let p = Point::new;
        let (a, a2, b, b2) = (p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.));
        assert_eq!(rho_parallel(a, a2, b, b2, 0.9).unwrap(), 0.0);
        assert_abs_diff_eq!(rho_parallel(a, a2, b, b2, 1.25f64.sqrt()).unwrap(), 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(rho_parallel(a, a2, b, b2, 2f64.sqrt()).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(rho_parallel(a, a2, b, b2, 1.0).unwrap(), 0.0);
        assert_eq!(
            rho_parallel(a, a2, p(2., 0.), p(3., 0.), 1.0),
            Err(Error::CoincidentLines)
        );
        let cfg = SegmentPairConfig::new(a, a2, b, b2).unwrap();
        assert_eq!(cfg.singular(), Some(1.0));
        let apart = SegmentPairConfig::new(a, a2, p(2., 1.), p(3., 1.)).unwrap();
        assert_eq!(apart.singular(), None);
    }

    #[test]
    fn near_parallel_limit() {
        let p = Point::new;
        let g: f64 = 1e-5;
        // bottom side fixed, top side tilted by γ about its midpoint
        let (a, a2) = (p(0., 0.), p(1., 0.));
        let half = Point::polar(0.5, g);
        let (b, b2) = (p(0.5, 1.) - half, p(0.5, 1.) + half);
        let tilted = SegmentPairConfig::new(a, a2, b, b2).unwrap();
        assert_eq!(tilted.class, PairClass::General);
        let flat = SegmentPairConfig::new(a, a2, p(0., 1.), p(1., 1.)).unwrap();
        for k in 1..40 {
            let ell = 1.02 + 0.38 * k as f64 / 40.0;
            let (x, y) = (tilted.eval(ell), flat.eval(ell));
            assert!((x - y).abs() <= 1e-3 * y.max(1e-3), "ℓ={ell}: {x} vs {y}");
        }
    }

    fn pt() -> impl Strategy<Value = Point> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn pair_symmetry(a in pt(), a2 in pt(), b in pt(), b2 in pt(), f in 0.01..1.0f64) {
            prop_assume!(a.dist(a2) > 0.1 && b.dist(b2) > 0.1);
            let one = SegmentPairConfig::new(a, a2, b, b2);
            prop_assume!(one.is_ok());
            let one = one.unwrap();
            let two = SegmentPairConfig::new(b2, b, a2, a).unwrap();
            let ell = f * one.max_length();
            let (x, y) = (one.eval(ell), two.eval(ell));
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }

        #[test]
        fn parallel_symmetry(x0 in -2.0..2.0f64, x1 in -2.0..2.0f64, y0 in -2.0..2.0f64, y1 in -2.0..2.0f64,
                             d in 0.1..2.0f64, f in 0.0..1.0f64) {
            prop_assume!((x0 - x1).abs() > 0.05 && (y0 - y1).abs() > 0.05);
            let p = Point::new;
            let one = rho_parallel(p(x0, 0.), p(x1, 0.), p(y0, d), p(y1, d), d + f * 3.0).unwrap();
            let two = rho_parallel(p(y1, d), p(y0, d), p(x0, 0.), p(x1, 0.), d + f * 3.0).unwrap();
            prop_assert!((one - two).abs() <= 1e-9 * one.max(1.0));
        }

        #[test]
        fn concurrent_nonnegative(a in 0.1..3.0f64, b in 0.1..3.0f64, g in 0.01..3.13f64, f in 0.0..1.2f64) {
            let t = solve_triangle(a, b, g).unwrap();
            let v = concurrent_eval(&t, f * a.max(b).max(t.c));
            prop_assert!(v >= -1e-12);
        }
    }
}
