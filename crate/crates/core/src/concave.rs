//! The diagonal-pentagon term: chords from a source side to the part of a
//! target side that lies between a fixed anchor and the point collinear with
//! the source point and a concave vertex.
//!
//! Three engines evaluate it: step bounds built from convex segment pairs,
//! a Riemann integral of the per-source-point kernel, and a semi-analytic
//! route that sums closed-form primitives between solved breakpoints.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{intersect_lines, length_scale, vector_angle, Point, TAU_DEG, TAU_PAR};
use crate::pair::SegmentPairConfig;
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[inline]
fn in_window(y: f64, y1: f64, y2: f64) -> bool {
    y >= y1 && y <= y2
}

/// Kernel for non-parallel sides: chord density per unit source length at a
/// source point `x` from the intersection point, with the far endpoint
/// restricted to `[y1, y2]` on the other ray.
pub(crate) fn kernel(x: f64, y1: f64, y2: f64, sg: f64, cg: f64, ell: f64) -> f64 {
    let xs = x * sg;
    let r = (ell - xs) * (ell + xs);
    if !(r > 0.0) {
        return 0.0;
    }
    let sr = r.sqrt();
    let pre = x * sg * sg / (ell * ell * sr);
    let mut out = 0.0;
    for y in [x * cg + sr, x * cg - sr] {
        if in_window(y, y1, y2) {
            out += pre * y;
        }
    }
    out
}

pub(crate) fn kernel_parallel(x: f64, y1: f64, y2: f64, d: f64, ell: f64) -> f64 {
    if !(ell > d) {
        return 0.0;
    }
    let s = ((ell - d) * (ell + d)).sqrt();
    let hits = [x - s, x + s].iter().filter(|y| in_window(**y, y1, y2)).count();
    hits as f64 * d * d / (ell * ell * s)
}

pub fn rho2_prime(x: f64, y1: f64, y2: f64, gamma: f64, ell: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < std::f64::consts::PI) || !(x >= 0.0) || !(ell > 0.0) || !(y1 <= y2) {
        return Err(Error::DegenerateInput(format!(
            "kernel arguments x={x} y=[{y1},{y2}] γ={gamma} ℓ={ell}"
        )));
    }
    let (sg, cg) = gamma.sin_cos();
    Ok(kernel(x, y1, y2, sg, cg, ell))
}

pub fn rho2_prime_parallel(x: f64, y1: f64, y2: f64, d: f64, ell: f64) -> Result<f64> {
    if !(d > 0.0) || !(ell > 0.0) || !(y1 <= y2) || !x.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "parallel kernel arguments x={x} y=[{y1},{y2}] d={d} ℓ={ell}"
        )));
    }
    Ok(kernel_parallel(x, y1, y2, d, ell))
}

pub(crate) fn primitive(x: f64, sg: f64, cg: f64, ell: f64, sign: f64) -> f64 {
    // at the end of the domain the root is exactly zero; rounding in x sin γ
    // would otherwise leave a residue of order √ε
    let (xs, sr) = if x == ell / sg {
        (ell, 0.0)
    } else {
        let xs = x * sg;
        (xs, ((ell - xs) * (ell + xs)).max(0.0).sqrt())
    };
    let cot = cg / sg;
    sign * xs / (2.0 * ell * ell) * (xs - sign * cot * sr) - cot / 2.0 * (sr / xs).atan()
}

/// Primitive in `x` of the `sign` branch of the non-parallel kernel (with
/// the window indicator dropped).
pub fn rho2_antiderivative(x: f64, gamma: f64, ell: f64, sign: Branch) -> Result<f64> {
    if !(gamma > 0.0 && gamma < std::f64::consts::PI) || !(x > 0.0) || !(ell > 0.0) {
        return Err(Error::DegenerateInput(format!("x={x} γ={gamma} ℓ={ell}")));
    }
    let (sg, cg) = gamma.sin_cos();
    if x * sg >= ell {
        return Err(Error::DomainError(format!("x sin γ = {} ≥ ℓ = {ell}", x * sg)));
    }
    Ok(primitive(x, sg, cg, ell, sign.sign()))
}

/// The branch integrand of the primitive, `x y± sin²γ / (ℓ² √R)`.
pub fn rho2_branch_integrand(x: f64, gamma: f64, ell: f64, sign: Branch) -> f64 {
    let (sg, cg) = gamma.sin_cos();
    let xs = x * sg;
    let sr = ((ell - xs) * (ell + xs)).sqrt();
    x * sg * sg * (x * cg + sign.sign() * sr) / (ell * ell * sr)
}

/// Coordinates shared by all engines: source points `s0 + x·v` for
/// `x ∈ [x_lo, x_hi]`, target points `t0 + y·w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
struct Frame {
    s0: Point,
    v: Point,
    t0: Point,
    w: Point,
    x_lo: f64,
    x_hi: f64,
    y_anchor: f64,
    y_far: f64,
    vertex: Point,
    sg: f64,
    cg: f64,
}

/// Chords from the source side `p_a p_b` to the target points between the
/// anchor `q_near` and the point collinear with the source point and `v`,
/// never beyond `q_far`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DPentConfig {
    pub p_a: Point,
    pub p_b: Point,
    pub v: Point,
    pub q_near: Point,
    pub q_far: Point,
    /// Intersection of the supporting lines, absent when they are parallel.
    pub o: Option<Point>,
    pub gamma: f64,
    /// Distance of the supporting lines, zero unless parallel.
    pub d: f64,
    #[serde(skip)]
    frame: Frame,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

impl BoundsResult {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemiAnalyticResult {
    pub value: f64,
    /// Set when breakpoint solving failed and the Riemann engine was used.
    pub fell_back: bool,
}

impl DPentConfig {
    pub fn new(p_a: Point, p_b: Point, v: Point, q_near: Point, q_far: Point) -> Result<Self> {
        let pts = [p_a, p_b, v, q_near, q_far];
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateInput("non-finite coordinate".into()));
        }
        let scale = length_scale(&pts);
        let tol = TAU_DEG * scale;
        if p_a.dist(p_b) <= tol || q_near.dist(q_far) <= tol {
            return Err(Error::DegenerateSegment);
        }
        let (u, t) = (p_b - p_a, q_far - q_near);
        let parallel = u.cross(t).abs() <= TAU_PAR * scale * scale;
        let (frame, o, gamma, d) = if parallel {
            let v_dir = u.unit();
            let normal = Point::new(-v_dir.y, v_dir.x);
            let off = (q_near - p_a).dot(normal);
            if off.abs() <= tol {
                return Err(Error::CoincidentLines);
            }
            let t0 = p_a + normal * off;
            let f = Frame {
                s0: p_a,
                v: v_dir,
                t0,
                w: v_dir,
                x_lo: 0.0,
                x_hi: u.norm(),
                y_anchor: (q_near - t0).dot(v_dir),
                y_far: (q_far - t0).dot(v_dir),
                vertex: v,
                sg: 0.0,
                cg: 1.0,
            };
            (f, None, 0.0, off.abs())
        } else {
            let o = intersect_lines(p_a, p_b, q_near, q_far)?;
            let ray = |p: Point, q: Point| -> Result<(Point, f64, f64)> {
                let far = if p.dist(o) >= q.dist(o) { p } else { q };
                let dir = (far - o).unit();
                let (a, b) = ((p - o).dot(dir), (q - o).dot(dir));
                if a.min(b) < -tol {
                    return Err(Error::InvalidConfig(
                        "the supporting lines meet inside a side".into(),
                    ));
                }
                Ok((dir, a.max(0.0), b.max(0.0)))
            };
            let (v_dir, xa, xb) = ray(p_a, p_b)?;
            let (w_dir, ya, yf) = ray(q_near, q_far)?;
            let gamma = vector_angle(v_dir, w_dir);
            let (sg, cg) = gamma.sin_cos();
            let f = Frame {
                s0: o,
                v: v_dir,
                t0: o,
                w: w_dir,
                x_lo: xa.min(xb),
                x_hi: xa.max(xb),
                y_anchor: ya,
                y_far: yf,
                vertex: v,
                sg,
                cg,
            };
            (f, Some(o), gamma, 0.0)
        };
        let cfg = DPentConfig {
            p_a,
            p_b,
            v,
            q_near,
            q_far,
            o,
            gamma,
            d,
            frame,
        };
        cfg.check_vertex(scale)?;
        Ok(cfg)
    }

    /// The vertex must sit between every source point and its opposite
    /// point, and the sight line may not turn parallel to the target.
    fn check_vertex(&self, scale: f64) -> Result<()> {
        let f = &self.frame;
        let mut sign = 0.0;
        for x in [f.x_lo, f.x_hi] {
            let p = f.s0 + f.v * x;
            let pv = p - f.vertex;
            let den = pv.cross(f.w);
            if den.abs() <= TAU_PAR * pv.norm().max(scale * TAU_DEG) || pv.norm() <= TAU_DEG * scale {
                return Err(Error::LineThroughVertexParallel);
            }
            if sign != 0.0 && den.signum() != sign {
                return Err(Error::LineThroughVertexParallel);
            }
            sign = den.signum();
            let q = f.t0 + f.w * f.op(x);
            let seg = q - p;
            let lambda = (f.vertex - p).dot(seg) / seg.dot(seg);
            let off = seg.cross(f.vertex - p).abs() / seg.norm();
            if !(lambda > -1e-9 && lambda < 1.0 + 1e-9) || off > 1e-6 * scale {
                return Err(Error::InvalidConfig(
                    "vertex is not between the source point and its opposite".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn is_parallel(&self) -> bool {
        self.o.is_none()
    }

    pub fn source_length(&self) -> f64 {
        self.frame.x_hi - self.frame.x_lo
    }

    /// Source point at coordinate `x`.
    pub fn source_point(&self, x: f64) -> Point {
        self.frame.s0 + self.frame.v * x
    }

    pub fn source_range(&self) -> (f64, f64) {
        (self.frame.x_lo, self.frame.x_hi)
    }

    /// Target coordinate of the point collinear with the source point at `x`
    /// and the vertex.
    pub fn opposite(&self, x: f64) -> f64 {
        self.frame.op(x)
    }

    /// Target window `[y1, y2]` for the source point at `x`, if nonempty.
    pub fn window(&self, x: f64) -> Option<(f64, f64)> {
        self.frame.window(x)
    }

    /// Longest chord the term can contain.
    pub fn max_length(&self) -> f64 {
        [self.p_a, self.p_b]
            .iter()
            .flat_map(|p| [self.q_near, self.q_far].map(|q| p.dist(q)))
            .fold(0.0, f64::max)
    }

    fn kernel_at(&self, x: f64, ell: f64) -> f64 {
        let f = &self.frame;
        match f.window(x) {
            None => 0.0,
            Some((y1, y2)) if self.is_parallel() => kernel_parallel(x, y1, y2, self.d, ell),
            Some((y1, y2)) => kernel(x, y1, y2, f.sg, f.cg, ell),
        }
    }

    /// Which kernel branches are live at `x`: (y₊ in window, y₋ in window).
    fn state(&self, x: f64, ell: f64) -> (bool, bool) {
        let f = &self.frame;
        let Some((y1, y2)) = f.window(x) else {
            return (false, false);
        };
        let s = if self.is_parallel() {
            if !(ell > self.d) {
                return (false, false);
            }
            ((ell - self.d) * (ell + self.d)).sqrt()
        } else {
            let xs = x * f.sg;
            let r = (ell - xs) * (ell + xs);
            if !(r > 0.0) {
                return (false, false);
            }
            r.sqrt()
        };
        let c = if self.is_parallel() { x } else { x * f.cg };
        (in_window(c + s, y1, y2), in_window(c - s, y1, y2))
    }

    /// Integral of the kernel over `[a, b]` on which the branch state is
    /// constant, using primitives.
    fn exact_piece(&self, a: f64, b: f64, ell: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let (plus, minus) = self.state(0.5 * (a + b), ell);
        if self.is_parallel() {
            if !(ell > self.d) {
                return 0.0;
            }
            let single = self.d * self.d / (ell * ell * ((ell - self.d) * (ell + self.d)).sqrt());
            return (plus as u8 + minus as u8) as f64 * single * (b - a);
        }
        let f = &self.frame;
        let mut out = 0.0;
        for (on, sign) in [(plus, 1.0), (minus, -1.0)] {
            if on {
                out += primitive(b, f.sg, f.cg, ell, sign) - primitive(a, f.sg, f.cg, ell, sign);
            }
        }
        out
    }
}

impl Frame {
    fn op(&self, x: f64) -> f64 {
        let pv = self.s0 + self.v * x - self.vertex;
        -pv.cross(self.t0 - self.vertex) / pv.cross(self.w)
    }

    /// Linear numerator and denominator of `op` in `x`: op = −N/D.
    fn op_parts(&self) -> (Poly, Poly) {
        let p0 = self.s0 - self.vertex;
        let tv = self.t0 - self.vertex;
        let n = Poly::new(vec![p0.cross(tv), self.v.cross(tv)]);
        let d = Poly::new(vec![p0.cross(self.w), self.v.cross(self.w)]);
        (n, d)
    }

    fn window(&self, x: f64) -> Option<(f64, f64)> {
        let span = self.y_far - self.y_anchor;
        let t = ((self.op(x) - self.y_anchor) / span).clamp(0.0, 1.0);
        if !(t > 0.0) {
            return None;
        }
        let end = self.y_anchor + t * span;
        Some((self.y_anchor.min(end), self.y_anchor.max(end)))
    }
}

/// Upper and lower step bounds over `n` equal source pieces: each piece is
/// paired with the largest (resp. smallest) window seen at its endpoints.
#[derive(Clone, Debug)]
pub struct BoundsModel {
    upper: Vec<SegmentPairConfig>,
    lower: Vec<SegmentPairConfig>,
    n: usize,
}

impl BoundsModel {
    pub fn new(cfg: &DPentConfig, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("bounds need n ≥ 1".into()));
        }
        let f = &cfg.frame;
        let span = f.y_far - f.y_anchor;
        let h = (f.x_hi - f.x_lo) / n as f64;
        let frac = |x: f64| ((f.op(x) - f.y_anchor) / span).clamp(0.0, 1.0);
        let anchor = f.t0 + f.w * f.y_anchor;
        let mut upper = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        let mut t_prev = frac(f.x_lo);
        for i in 0..n {
            let (x0, x1) = (f.x_lo + h * i as f64, if i + 1 == n { f.x_hi } else { f.x_lo + h * (i + 1) as f64 });
            let t_next = frac(x1);
            let (p0, p1) = (f.s0 + f.v * x0, f.s0 + f.v * x1);
            for (t, out) in [(t_prev.max(t_next), &mut upper), (t_prev.min(t_next), &mut lower)] {
                if t * span.abs() > TAU_DEG * span.abs().max(1.0) {
                    let q = f.t0 + f.w * (f.y_anchor + t * span);
                    out.push(SegmentPairConfig::new(p0, p1, anchor, q)?);
                }
            }
            t_prev = t_next;
        }
        Ok(BoundsModel { upper, lower, n })
    }

    pub fn eval(&self, ell: f64) -> BoundsResult {
        let sum = |v: &[SegmentPairConfig]| v.iter().map(|p| p.eval(ell)).sum::<f64>();
        let (lower, upper) = (sum(&self.lower), sum(&self.upper));
        BoundsResult {
            lower: lower.min(upper),
            upper: upper.max(lower),
            n: self.n,
        }
    }
}

pub fn rho_conc_bounds(cfg: &DPentConfig, ell: f64, n: usize) -> Result<BoundsResult> {
    Ok(BoundsModel::new(cfg, n)?.eval(ell))
}

const BISECT_STEPS: usize = 80;
const SPLIT_DEPTH: usize = 8;

type State = (bool, bool);

/// Apply `rule` on `[a, b]`, first splitting at points where `state`
/// changes (located by bisection, at most `depth` splits).
fn split_on_state(
    a: f64,
    b: f64,
    depth: usize,
    state: &impl Fn(f64) -> State,
    rule: &impl Fn(f64, f64) -> f64,
) -> f64 {
    // one-sided states: at x = ℓ / sin γ the kernel's root is zero and the
    // endpoint itself may round either way
    let nudge = ((b - a) * 1e-9).max(a.abs().max(b.abs()) * 1e-13).min(0.25 * (b - a));
    let sa = state(a + nudge);
    if depth == 0 || sa == state(b - nudge) {
        return rule(a, b);
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..BISECT_STEPS {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if state(m) == sa {
            lo = m;
        } else {
            hi = m;
        }
    }
    let j = 0.5 * (lo + hi);
    rule(a, j) + split_on_state(j, b, depth - 1, state, rule)
}

/// Midpoint rule with `n` panels over the source side, panels split where
/// the window indicator jumps. For non-parallel sides the source coordinate
/// is written `x = (ℓ / sin γ)·sin φ`, which turns the inverse square-root
/// endpoint singularity of the kernel into a smooth integrand in `φ`.
pub fn rho_conc_riemann(cfg: &DPentConfig, ell: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidConfig("riemann needs n ≥ 1".into()));
    }
    if !(ell > 0.0) {
        return Ok(0.0);
    }
    let f = &cfg.frame;
    if cfg.is_parallel() {
        let h = (f.x_hi - f.x_lo) / n as f64;
        let state = |x: f64| cfg.state(x, ell);
        let rule = |a: f64, b: f64| (b - a) * cfg.kernel_at(0.5 * (a + b), ell);
        return Ok((0..n)
            .map(|i| {
                let a = f.x_lo + h * i as f64;
                let b = if i + 1 == n { f.x_hi } else { a + h };
                split_on_state(a, b, SPLIT_DEPTH, &state, &rule)
            })
            .sum());
    }
    let x_sing = ell / f.sg;
    let top = f.x_hi.min(x_sing);
    if !(top > f.x_lo) {
        return Ok(0.0);
    }
    let phi_lo = (f.x_lo / x_sing).clamp(0.0, 1.0).asin();
    let phi_hi = (top / x_sing).clamp(0.0, 1.0).asin();
    let h = (phi_hi - phi_lo) / n as f64;
    let state = |phi: f64| cfg.state(x_sing * phi.sin(), ell);
    let rule = |a: f64, b: f64| {
        let phi = 0.5 * (a + b);
        let x = x_sing * phi.sin();
        let Some((y1, y2)) = f.window(x) else {
            return 0.0;
        };
        let root = ell * phi.cos();
        let mut g = 0.0;
        for y in [x * f.cg + root, x * f.cg - root] {
            if in_window(y, y1, y2) {
                g += x * y * f.sg / (ell * ell);
            }
        }
        (b - a) * g
    };
    Ok((0..n)
        .map(|i| {
            let a = phi_lo + h * i as f64;
            let b = if i + 1 == n { phi_hi } else { a + h };
            split_on_state(a, b, SPLIT_DEPTH, &state, &rule)
        })
        .sum())
}

/// Doubles the panel count from `n0` until two successive doublings each
/// change the value by less than `rel·|value| + abs`.
pub fn rho_conc_riemann_adaptive(cfg: &DPentConfig, ell: f64, n0: usize, rel: f64, abs: f64) -> Result<f64> {
    let mut n = n0.max(1);
    let mut prev = rho_conc_riemann(cfg, ell, n)?;
    let mut calm = 0;
    for _ in 0..14 {
        n *= 2;
        let cur = rho_conc_riemann(cfg, ell, n)?;
        calm = if (cur - prev).abs() < rel * cur.abs() + abs { calm + 1 } else { 0 };
        prev = cur;
        if calm == 2 {
            return Ok(cur);
        }
    }
    log::warn!("riemann engine did not reach tolerance at ℓ={ell} (n={n})");
    Ok(prev)
}

pub const RIEMANN_START: usize = 1024;
pub const RIEMANN_REL: f64 = 1e-6;
pub const RIEMANN_ABS: f64 = 1e-12;

impl DPentConfig {
    /// Abscissae in the source range where the integrand may change form.
    fn breakpoints(&self, ell: f64) -> Result<Vec<f64>> {
        let f = &self.frame;
        let (lo, hi) = (f.x_lo, f.x_hi);
        let mut xs = vec![lo, hi];
        let mut push = |x: f64| {
            if x > lo && x < hi {
                xs.push(x);
            }
        };
        let c0 = f.t0 - f.s0;
        // chord of length ℓ to a fixed target coordinate
        for y in [f.y_anchor, f.y_far] {
            let c = c0 + f.w * y;
            let b = c.dot(f.v);
            let disc = b * b - (c.dot(c) - ell * ell);
            if disc >= 0.0 {
                push(b - disc.sqrt());
                push(b + disc.sqrt());
            }
        }
        let (n, d) = f.op_parts();
        // window clipped at either end of the target segment: op(x) = y
        for y in [f.y_anchor, f.y_far] {
            let lin = n.add(&d.scale(y));
            for r in lin.real_roots(lo, hi)? {
                push(r);
            }
        }
        // chord of length ℓ to the moving window end
        let cx = Poly::new(vec![c0.x, -f.v.x]);
        let cy = Poly::new(vec![c0.y, -f.v.y]);
        let gx = d.mul(&cx).sub(&n.scale(f.w.x));
        let gy = d.mul(&cy).sub(&n.scale(f.w.y));
        let quartic = gx.mul(&gx).add(&gy.mul(&gy)).sub(&d.mul(&d).scale(ell * ell));
        for r in quartic.real_roots(lo, hi)? {
            push(r);
        }
        if !self.is_parallel() && f.sg > 0.0 {
            push(ell / f.sg);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        Ok(xs)
    }
}

impl DPentConfig {
    /// Superset of the chord lengths where the term's density is not
    /// smooth: critical distances over the boundary of the chord domain.
    pub fn length_breakpoints(&self) -> Vec<f64> {
        let f = &self.frame;
        let target = |y: f64| f.t0 + f.w * y;
        let end = |x: f64| {
            let span = f.y_far - f.y_anchor;
            f.y_anchor + ((f.op(x) - f.y_anchor) / span).clamp(0.0, 1.0) * span
        };
        let mut out = Vec::new();
        for x in [f.x_lo, f.x_hi] {
            let p = self.source_point(x);
            let (y1, y2) = (f.y_anchor.min(end(x)), f.y_anchor.max(end(x)));
            out.push(p.dist(target(y1)));
            out.push(p.dist(target(y2)));
            let foot = (p - f.t0).dot(f.w);
            if foot > y1 && foot < y2 {
                out.push((p - f.t0).cross(f.w).abs());
            }
        }
        for y in [f.y_anchor, f.y_far] {
            let q = target(y);
            let foot = (q - f.s0).dot(f.v);
            if foot > f.x_lo && foot < f.x_hi {
                out.push((q - f.s0).cross(f.v).abs());
            }
        }
        // the moving window end: corners where the clamp engages, and
        // local extrema of its distance to the source point
        let g = |x: f64| self.source_point(x).dist(target(end(x)));
        let (n, d) = f.op_parts();
        for y in [f.y_anchor, f.y_far] {
            if let Ok(roots) = n.add(&d.scale(y)).real_roots(f.x_lo, f.x_hi) {
                out.extend(roots.into_iter().map(g));
            }
        }
        const SAMPLES: usize = 256;
        let h = (f.x_hi - f.x_lo) / SAMPLES as f64;
        let xs: Vec<f64> = (0..=SAMPLES).map(|i| f.x_lo + h * i as f64).collect();
        let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        for i in 1..SAMPLES {
            let (a, b, c) = (gs[i - 1], gs[i], gs[i + 1]);
            let sign = if b <= a && b <= c {
                1.0
            } else if b >= a && b >= c {
                -1.0
            } else {
                continue;
            };
            let (mut lo, mut hi) = (xs[i - 1], xs[i + 1]);
            for _ in 0..100 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if sign * g(m1) < sign * g(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            out.push(g(0.5 * (lo + hi)));
        }
        out.retain(|x| x.is_finite() && *x > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// The line distance of a parallel configuration, where the density
    /// diverges.
    pub fn singular(&self) -> Option<f64> {
        self.is_parallel().then_some(self.d)
    }
}

/// Sum of primitive differences between solved breakpoints. Falls back to
/// the adaptive Riemann engine if a breakpoint polynomial degenerates.
pub fn rho_conc_semianalytic(cfg: &DPentConfig, ell: f64) -> Result<SemiAnalyticResult> {
    if !(ell > 0.0) {
        return Ok(SemiAnalyticResult {
            value: 0.0,
            fell_back: false,
        });
    }
    match cfg.breakpoints(ell) {
        Ok(xs) => {
            let value = xs
                .windows(2)
                .map(|w| {
                    split_on_state(w[0], w[1], 2, &|x| cfg.state(x, ell), &|a, b| {
                        cfg.exact_piece(a, b, ell)
                    })
                })
                .sum();
            Ok(SemiAnalyticResult {
                value,
                fell_back: false,
            })
        }
        Err(Error::RootFindingFailure(msg)) => {
            log::warn!("semi-analytic breakpoints failed at ℓ={ell}: {msg}; using the riemann engine");
            let value = rho_conc_riemann_adaptive(cfg, ell, RIEMANN_START, RIEMANN_REL, RIEMANN_ABS)?;
            Ok(SemiAnalyticResult {
                value,
                fell_back: true,
            })
        }
        Err(e) => Err(e),
    }
}
