//! Chord-length measure density of a triangle, built from the three
//! vertex-dominated families of chords.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Point, TriangleSides, TAU_ANG};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TriangleKind {
    AcuteOrRight,
    Obtuse,
}

/// A triangle labelled so that `c` is the longest side (γ the largest angle).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleDensity {
    pub sides: TriangleSides,
    pub kind: TriangleKind,
}

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `asin(u) - u·sqrt(1-u²)`, the recurring arc term.
#[inline]
pub(crate) fn arc_term(u: f64) -> f64 {
    let u = clamp_unit(u);
    u.asin() - u * (1.0 - u * u).max(0.0).sqrt()
}

fn check_triangle(alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, c: f64, ell: f64) -> Result<()> {
    let sides_ok = [a, b, c].iter().all(|s| s.is_finite() && *s > 0.0);
    let angles_ok = [alpha, beta, gamma].iter().all(|t| *t > 0.0 && *t < PI);
    if !sides_ok || !angles_ok || (alpha + beta + gamma - PI).abs() > 1e-9 {
        return Err(Error::DegenerateInput("not a valid triangle".into()));
    }
    if !(ell.is_finite() && ell >= 0.0) {
        return Err(Error::DegenerateInput(format!("chord length {ell}")));
    }
    Ok(())
}

pub(crate) fn vertex_ac(ell: f64, alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, c: f64) -> f64 {
    let area = 0.5 * a * b * gamma.sin();
    let h = 2.0 * area / c;
    let pre = c * c / (4.0 * area);
    if ell < h {
        return pre * (gamma + 0.5 * (2.0 * alpha).sin() + 0.5 * (2.0 * beta).sin());
    }
    if ell == h {
        return 0.0;
    }
    let arc = arc_term(h / ell);
    let mut s = 0.0;
    if b > ell {
        s += arc - alpha + 0.5 * (2.0 * alpha).sin();
    }
    if a > ell {
        s += arc - beta + 0.5 * (2.0 * beta).sin();
    }
    pre * s
}

pub(crate) fn vertex_obt(ell: f64, alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, c: f64) -> f64 {
    let area = 0.5 * a * b * gamma.sin();
    let pre = a * a / (4.0 * area);
    if ell < b {
        pre * (alpha + 0.5 * (2.0 * beta).sin() + 0.5 * (2.0 * gamma).sin())
    } else if ell > b && ell < c {
        pre * (arc_term(2.0 * area / (a * ell)) - beta + 0.5 * (2.0 * beta).sin())
    } else {
        0.0
    }
}

/// Density of chords dominated by vertex C (the vertex opposite `c`) when
/// neither of the other two angles is obtuse.
pub fn rho_vertex_ac(ell: f64, alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    check_triangle(alpha, beta, gamma, a, b, c, ell)?;
    Ok(vertex_ac(ell, alpha, beta, gamma, a, b, c))
}

/// Density of chords dominated by vertex A when the triangle lies entirely
/// on one side of the height from A (γ obtuse, `c` the longest side).
pub fn rho_vertex_obt(ell: f64, alpha: f64, beta: f64, gamma: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    check_triangle(alpha, beta, gamma, a, b, c, ell)?;
    Ok(vertex_obt(ell, alpha, beta, gamma, a, b, c))
}

impl TriangleDensity {
    pub fn new(sides: TriangleSides) -> Result<Self> {
        let TriangleSides { a, b, c, alpha, beta, gamma, .. } = sides;
        check_triangle(alpha, beta, gamma, a, b, c, 0.0)?;
        let mut pairs = [(a, alpha), (b, beta), (c, gamma)];
        pairs.sort_by(|p, q| p.1.total_cmp(&q.1));
        let [(a, alpha), (b, beta), (c, gamma)] = pairs;
        let sides = TriangleSides {
            a,
            b,
            c,
            alpha,
            beta,
            gamma,
            area: sides.area,
        };
        let kind = if gamma > FRAC_PI_2 + TAU_ANG {
            TriangleKind::Obtuse
        } else {
            TriangleKind::AcuteOrRight
        };
        Ok(TriangleDensity { sides, kind })
    }

    pub fn from_points(p: Point, q: Point, r: Point) -> Result<Self> {
        TriangleDensity::new(TriangleSides::from_points(p, q, r)?)
    }

    pub fn eval(&self, ell: f64) -> f64 {
        let TriangleSides { a, b, c, alpha, beta, gamma, .. } = self.sides;
        if !(ell < c) {
            return 0.0;
        }
        match self.kind {
            TriangleKind::AcuteOrRight => {
                vertex_ac(ell, beta, gamma, alpha, b, c, a)
                    + vertex_ac(ell, gamma, alpha, beta, c, a, b)
                    + vertex_ac(ell, alpha, beta, gamma, a, b, c)
            }
            TriangleKind::Obtuse => {
                vertex_obt(ell, alpha, beta, gamma, a, b, c)
                    + vertex_obt(ell, beta, alpha, gamma, b, a, c)
                    + vertex_ac(ell, alpha, beta, gamma, a, b, c)
            }
        }
    }

    /// Sorted kink locations: the three heights and the three sides.
    pub fn breakpoints(&self) -> Vec<f64> {
        let s = &self.sides;
        let mut v = [s.heights().to_vec(), vec![s.a, s.b, s.c]].concat();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn support_end(&self) -> f64 {
        self.sides.c
    }
}

pub fn triangle_cld(tri: &TriangleDensity, ell: f64) -> f64 {
    tri.eval(ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{orient, solve_triangle};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use quadrature::double_exponential;

    /// Direct per-direction integral: for direction θ the chords have
    /// lengths uniform on [0, L(θ)] over the projected width w(θ), where
    /// L(θ) is the chord through the middle vertex. Only directions whose
    /// middle vertex is `only` are counted when it is given.
    fn direct_density(pts: [Point; 3], ell: f64, only: Option<usize>) -> f64 {
        let integrand = |theta: f64| -> (f64, f64) {
            let d = Point::new(theta.cos(), theta.sin());
            let n = Point::new(-d.y, d.x);
            let mut idx = [0usize, 1, 2];
            idx.sort_by(|&i, &j| n.dot(pts[i]).total_cmp(&n.dot(pts[j])));
            let m = idx[1];
            let w = n.dot(pts[idx[2]]) - n.dot(pts[idx[0]]);
            let (pj, pk) = (pts[idx[0]], pts[idx[2]]);
            let t = (pj - pts[m]).cross(pk - pj) / d.cross(pk - pj);
            let len = t.abs();
            let keep = only.map_or(true, |v| v == m);
            (if keep { w / len } else { 0.0 }, len - ell)
        };
        // smooth pieces split at side directions and at L(θ) = ℓ
        let mut cuts = vec![0.0, PI];
        for i in 0..3 {
            let e = pts[(i + 1) % 3] - pts[i];
            cuts.push(e.y.atan2(e.x).rem_euclid(PI));
        }
        cuts.sort_by(f64::total_cmp);
        let mut knots = Vec::new();
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            knots.push(lo);
            let m = 4000;
            let mut prev = integrand(lo + 1e-13).1;
            for k in 1..=m {
                let th = lo + (hi - lo) * k as f64 / m as f64 - if k == m { 1e-13 } else { 0.0 };
                let cur = integrand(th).1;
                if prev.signum() != cur.signum() {
                    let (mut a, mut b) = (lo + (hi - lo) * (k - 1) as f64 / m as f64, th);
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if integrand(mid).1.signum() == prev.signum() {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    knots.push(0.5 * (a + b));
                }
                prev = cur;
            }
        }
        knots.push(PI);
        knots
            .windows(2)
            .map(|w| {
                double_exponential::integrate(
                    |t| {
                        let (f, g) = integrand(t);
                        if g > 0.0 {
                            f
                        } else {
                            0.0
                        }
                    },
                    w[0],
                    w[1],
                    1e-12,
                )
                .integral
            })
            .sum()
    }

    fn equilateral() -> [Point; 3] {
        [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ]
    }

    #[test]
    fn vertex_ac_matches_direct_integral() {
        let third = PI / 3.0;
        let pts = equilateral();
        for &ell in &[0.4, 0.95] {
            let got = rho_vertex_ac(ell, third, third, third, 1.0, 1.0, 1.0).unwrap();
            let want = direct_density(pts, ell, Some(2));
            assert!((got - want).abs() < 1e-8, "ℓ={ell}: {got} vs {want}");
        }
        assert_eq!(rho_vertex_ac(2.0, third, third, third, 1.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn vertex_obt_matches_direct_integral() {
        // A = (0,0), B = (4,0), C = (3.8,0.5): γ at C is obtuse, c = AB is longest
        let (pa, pb, pc) = (Point::new(0., 0.), Point::new(4., 0.), Point::new(3.8, 0.5));
        let tri = TriangleDensity::from_points(pa, pb, pc).unwrap();
        assert_eq!(tri.kind, TriangleKind::Obtuse);
        let s = tri.sides;
        // a = |BC| is the shorter side next to γ; vertex A sits opposite it
        let (va, vb) = if (pb.dist(pc) - s.a).abs() < 1e-12 { (pa, pb) } else { (pb, pa) };
        let pts = [va, vb, pc];
        let ell = 1.0;
        let got = rho_vertex_obt(ell, s.alpha, s.beta, s.gamma, s.a, s.b, s.c).unwrap();
        assert!((got - direct_density(pts, ell, Some(0))).abs() < 1e-8);
        let got_b = rho_vertex_obt(ell, s.beta, s.alpha, s.gamma, s.b, s.a, s.c).unwrap();
        assert!((got_b - direct_density(pts, ell, Some(1))).abs() < 1e-8);
        for &ell in &[0.2, 0.45, 3.0, 3.9] {
            assert!((tri.eval(ell) - direct_density(pts, ell, None)).abs() < 1e-8, "ℓ={ell}");
        }
        assert_eq!(rho_vertex_obt(4.5, s.alpha, s.beta, s.gamma, s.a, s.b, s.c).unwrap(), 0.0);
    }

    #[test]
    fn right_angle_branches_agree() {
        let t = solve_triangle(3.0, 4.0, FRAC_PI_2).unwrap();
        for k in 1..60 {
            let ell = 5.0 * k as f64 / 60.0 + 1e-7;
            let ac = vertex_obt(ell, t.alpha, t.beta, t.gamma, t.a, t.b, t.c)
                + vertex_obt(ell, t.beta, t.alpha, t.gamma, t.b, t.a, t.c);
            let ob = vertex_ac(ell, t.beta, t.gamma, t.alpha, t.b, t.c, t.a)
                + vertex_ac(ell, t.gamma, t.alpha, t.beta, t.c, t.a, t.b);
            assert!((ac - ob).abs() < 1e-9, "ℓ={ell}: {ac} vs {ob}");
        }
    }

    #[test]
    fn equilateral_support_and_total() {
        let tri = TriangleDensity::from_points(equilateral()[0], equilateral()[1], equilateral()[2]).unwrap();
        assert_eq!(tri.eval(1.001), 0.0);
        let bps = tri.breakpoints();
        let mut knots = vec![0.0];
        knots.extend(bps.iter().copied());
        let total: f64 = knots
            .windows(2)
            .map(|w| double_exponential::integrate(|l| tri.eval(l), w[0], w[1], 1e-12).integral)
            .sum();
        assert_abs_diff_eq!(total, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(rho_vertex_ac(0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(rho_vertex_ac(-0.5, PI / 3.0, PI / 3.0, PI / 3.0, 1.0, 1.0, 1.0).is_err());
        assert!(rho_vertex_obt(0.5, PI / 3.0, PI / 3.0, PI / 3.0, 0.0, 1.0, 1.0).is_err());
    }

    fn tri_strategy() -> impl Strategy<Value = [Point; 3]> {
        prop::array::uniform3((-5.0..5.0f64, -5.0..5.0f64))
            .prop_map(|v| v.map(|(x, y)| Point::new(x, y)))
            .prop_filter("well-shaped", |p| {
                let s = [p[0].dist(p[1]), p[1].dist(p[2]), p[2].dist(p[0])];
                let area = orient(p[0], p[1], p[2]).abs() / 2.0;
                s.iter().all(|l| *l > 0.05) && area > 0.01 * s.iter().cloned().fold(0.0, f64::max).powi(2)
            })
    }

    proptest! {
        #[test]
        fn cosine_projection_identity(p in tri_strategy()) {
            let t = TriangleSides::from_points(p[0], p[1], p[2]).unwrap();
            let lhs = t.c * (t.alpha.cos() + t.beta.cos())
                + t.b * (t.gamma.cos() + t.alpha.cos())
                + t.a * (t.beta.cos() + t.gamma.cos());
            prop_assert!((lhs - t.perimeter()).abs() < 1e-9 * t.perimeter().max(1.0));
        }

        #[test]
        fn relabelling_is_harmless(p in tri_strategy(), f in 0.01..0.99f64) {
            let base = TriangleDensity::from_points(p[0], p[1], p[2]).unwrap();
            let perm = TriangleDensity::from_points(p[2], p[0], p[1]).unwrap();
            let flip = TriangleDensity::from_points(p[1], p[0], p[2]).unwrap();
            let ell = f * base.sides.c;
            prop_assert!((base.eval(ell) - perm.eval(ell)).abs() < 1e-12 * base.eval(ell).max(1.0));
            prop_assert!((base.eval(ell) - flip.eval(ell)).abs() < 1e-12 * base.eval(ell).max(1.0));
        }

        #[test]
        fn scaling_law(p in tri_strategy(), s in 0.1..10.0f64, f in 0.01..0.99f64) {
            let base = TriangleDensity::from_points(p[0], p[1], p[2]).unwrap();
            let big = TriangleDensity::from_points(p[0] * s, p[1] * s, p[2] * s).unwrap();
            let ell = f * base.sides.c;
            prop_assert!((big.eval(s * ell) - base.eval(ell)).abs() < 1e-9 * base.eval(ell).max(1.0));
        }

        #[test]
        fn rigid_motion(p in tri_strategy(), ang in 0.0..std::f64::consts::TAU, dx in -3.0..3.0f64, f in 0.01..0.99f64) {
            let base = TriangleDensity::from_points(p[0], p[1], p[2]).unwrap();
            let m = |q: Point| q.rotated(ang) + Point::new(dx, -dx);
            let moved = TriangleDensity::from_points(m(p[0]), m(p[1]), m(p[2])).unwrap();
            let ell = f * base.sides.c;
            prop_assert!((moved.eval(ell) - base.eval(ell)).abs() < 1e-9 * base.eval(ell).max(1.0));
        }
    }
}
