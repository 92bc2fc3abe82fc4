//! General polygons. For every pair of sides the source side is cut into
//! pieces on which each visible stretch of the target side is bounded by
//! fixed points or by the shadow of one vertex; each stretch becomes at most
//! three signed terms: two diagonal-pentagon terms around a convex core.

use serde::Serialize;

use crate::concave::{rho_conc_riemann_adaptive, rho_conc_semianalytic, BoundsModel, DPentConfig};
use crate::concave::{RIEMANN_REL, RIEMANN_START};
use crate::convex::{self, ConvexMcd};
use crate::curve::{sample_model, DensityCurve, DensityModel, Engine, GridSpec, Sample};
use crate::geom::{convex_cover, orient, segments_touch, Edge, Point, Polygon, TAU_DEG, TAU_PAR};
use crate::pair::SegmentPairConfig;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Qu,
    Dpent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGeometry {
    Qu(SegmentPairConfig),
    Dpent(DPentConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanTerm {
    pub kind: TermKind,
    pub coefficient: f64,
    pub case_id: u8,
    pub geometry: TermGeometry,
}

/// A piece `p_a p_b` of the source side with the terms of every visible
/// stretch of the target side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubSegment {
    pub p_a: Point,
    pub p_b: Point,
    pub terms: Vec<PlanTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionPlan {
    pub source: usize,
    pub target: usize,
    pub pieces: Vec<SubSegment>,
    /// Set when shadows of distinct vertices coincided at a sample point.
    pub aligned: bool,
}

/// What bounds a visible stretch of the target side at one end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Label {
    Start,
    End,
    Cross,
    Vertex(usize),
}

struct PairGeom<'a> {
    a: Point,
    b: Point,
    c: Point,
    d: Point,
    edges: &'a [Edge],
    source: usize,
    target: usize,
    blockers: Vec<Point>,
    /// Target parameter of the source line's crossing, if inside the side.
    t_cross: Option<f64>,
    eps: f64,
}

/// Parameter along `a b` where it meets the line through `u` and `u2`.
fn line_param(a: Point, b: Point, u: Point, u2: Point) -> Option<f64> {
    let den = (b - a).cross(u2 - u);
    let s = (u - a).cross(u2 - u) / den;
    s.is_finite().then_some(s)
}

impl<'a> PairGeom<'a> {
    fn new(poly: &Polygon, edges: &'a [Edge], source: usize, target: usize) -> Self {
        let (e, f) = (edges[source], edges[target]);
        let scale = poly.length_scale();
        let eps = TAU_PAR * scale * scale;
        let hull = convex_cover(&[e.a, e.b, f.a, f.b]);
        let n = hull.len();
        let in_hull = |w: Point| (0..n).all(|i| orient(hull[i], hull[(i + 1) % n], w) >= -eps);
        let blockers = poly
            .vertices()
            .into_iter()
            .filter(|&w| {
                in_hull(w) && orient(e.a, e.b, w).abs() > eps && orient(f.a, f.b, w).abs() > eps
            })
            .collect();
        let t_cross = line_param(f.a, f.b, e.a, e.b).filter(|t| *t > 0.0 && *t < 1.0);
        PairGeom {
            a: e.a,
            b: e.b,
            c: f.a,
            d: f.b,
            edges,
            source,
            target,
            blockers,
            t_cross,
            eps,
        }
    }

    fn p_at(&self, s: f64) -> Point {
        if s == 0.0 {
            self.a
        } else if s == 1.0 {
            self.b
        } else {
            self.a.lerp(self.b, s)
        }
    }

    fn q_at(&self, t: f64) -> Point {
        if t == 0.0 {
            self.c
        } else if t == 1.0 {
            self.d
        } else {
            self.c.lerp(self.d, t)
        }
    }

    /// Target parameter of the point collinear with `p` and `w`.
    fn shadow(&self, p: Point, w: Point) -> Option<f64> {
        line_param(self.c, self.d, p, w)
    }

    /// Shadow of `w` seen from `p` when `w` sits strictly between `p` and
    /// the target line.
    fn blocking_shadow(&self, p: Point, w: Point) -> Option<f64> {
        let den = (w - p).cross(self.d - self.c);
        let lambda = (self.c - p).cross(self.d - self.c) / den;
        if !(lambda.is_finite() && lambda > 1.0) {
            return None;
        }
        self.shadow(p, w)
    }

    fn label_t(&self, p: Point, label: Label) -> f64 {
        match label {
            Label::Start => 0.0,
            Label::End => 1.0,
            Label::Cross => self.t_cross.expect("cross label implies a crossing"),
            Label::Vertex(i) => self.shadow(p, self.blockers[i]).unwrap_or(0.0).clamp(0.0, 1.0),
        }
    }

    fn chord_clear(&self, p: Point, q: Point) -> bool {
        if orient(self.a, self.b, q) <= self.eps || orient(self.c, self.d, p) <= self.eps {
            return false;
        }
        self.edges.iter().enumerate().all(|(k, e)| {
            k == self.source || k == self.target || !segments_touch(p, q, e.a, e.b, self.eps)
        })
    }

    /// Visible stretches of the target side from the source point at `s`,
    /// with the label bounding each end. Also reports coincident shadows.
    fn visible(&self, s: f64) -> (Vec<(Label, Label)>, bool) {
        let p = self.p_at(s);
        let mut cuts = vec![(0.0, Label::Start), (1.0, Label::End)];
        if let Some(t) = self.t_cross {
            cuts.push((t, Label::Cross));
        }
        for (i, &w) in self.blockers.iter().enumerate() {
            if let Some(t) = self.blocking_shadow(p, w) {
                if t > 0.0 && t < 1.0 {
                    cuts.push((t, Label::Vertex(i)));
                }
            }
        }
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let aligned = cuts.windows(2).any(|w| w[1].0 - w[0].0 <= 1e-12);
        let mut runs: Vec<(Label, Label)> = Vec::new();
        let mut open = false;
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0].0, w[1].0);
            let clear = t1 - t0 > 1e-12 && self.chord_clear(p, self.q_at(0.5 * (t0 + t1)));
            match (clear, open) {
                (true, true) => runs.last_mut().expect("open run").1 = w[1].1,
                (true, false) => runs.push((w[0].1, w[1].1)),
                _ => {}
            }
            open = clear;
        }
        (runs, aligned)
    }

    /// Source parameters where the visible structure may change.
    fn events(&self) -> Vec<f64> {
        let (a, b) = (self.a, self.b);
        let mut out = vec![0.0, 1.0];
        if let Some(s) = line_param(a, b, self.c, self.d) {
            out.push(s);
        }
        let cross = self.t_cross.map(|t| self.q_at(t));
        let dir = self.d - self.c;
        for (i, &w) in self.blockers.iter().enumerate() {
            let mut through = vec![self.c, self.d, w + dir];
            through.extend(cross);
            through.extend(self.blockers[i + 1..].iter().copied());
            out.extend(through.into_iter().filter_map(|u| line_param(a, b, w, u)));
        }
        out.retain(|s| *s >= 0.0 && *s <= 1.0);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= TAU_DEG);
        *out.first_mut().expect("nonempty") = 0.0;
        *out.last_mut().expect("nonempty") = 1.0;
        out
    }
}

fn case_id(lo_vertex: bool, hi_vertex: bool, l: (f64, f64), h: (f64, f64), tol: f64) -> u8 {
    let (max_l, min_h) = (l.0.max(l.1), h.0.min(h.1));
    match (lo_vertex, hi_vertex) {
        (false, false) => 8,
        (false, true) => 6,
        (true, false) => 7,
        (true, true) if (h.0 - l.0).abs() <= tol => 4,
        (true, true) if (h.1 - l.1).abs() <= tol => 5,
        (true, true) if (max_l - min_h).abs() <= tol => 3,
        (true, true) if max_l < min_h => 1,
        (true, true) => 2,
    }
}

/// Signed terms for the chords from the source side `source` to the target
/// side `target` (indices into [`Polygon::edges`]).
pub fn decompose_pair(poly: &Polygon, source: usize, target: usize) -> Result<DecompositionPlan> {
    let edges = poly.edges();
    if source == target || source >= edges.len() || target >= edges.len() {
        return Err(Error::InvalidConfig(format!("bad side pair ({source}, {target})")));
    }
    let g = PairGeom::new(poly, &edges, source, target);
    let mut plan = DecompositionPlan {
        source,
        target,
        pieces: Vec::new(),
        aligned: false,
    };
    if orient(g.a, g.b, g.c).abs() <= g.eps && orient(g.a, g.b, g.d).abs() <= g.eps {
        return Ok(plan);
    }
    // merge neighbouring pieces whose stretches have the same limiters
    let events = g.events();
    let mut merged: Vec<(f64, f64, Vec<(Label, Label)>)> = Vec::new();
    for w in events.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 - s0 <= TAU_DEG {
            continue;
        }
        let (runs, aligned) = g.visible(0.5 * (s0 + s1));
        plan.aligned |= aligned;
        match merged.last_mut() {
            Some(last) if last.2 == runs => last.1 = s1,
            _ => merged.push((s0, s1, runs)),
        }
    }
    let tol = 1e-12;
    for (s0, s1, runs) in merged {
        if runs.is_empty() {
            continue;
        }
        let (p_a, p_b) = (g.p_at(s0), g.p_at(s1));
        let mut terms = Vec::new();
        for (lo, hi) in runs {
            let l = (g.label_t(p_a, lo), g.label_t(p_b, lo));
            let h = (g.label_t(p_a, hi), g.label_t(p_b, hi));
            let (min_l, max_l) = (l.0.min(l.1), l.0.max(l.1));
            let (min_h, max_h) = (h.0.min(h.1), h.0.max(h.1));
            let lo_vertex = matches!(lo, Label::Vertex(_)) && max_l - min_l > tol;
            let hi_vertex = matches!(hi, Label::Vertex(_)) && max_h - min_h > tol;
            let case = case_id(lo_vertex, hi_vertex, l, h, tol);
            if (max_l - min_h).abs() > tol {
                let (coefficient, t0, t1) = if max_l < min_h {
                    (1.0, max_l, min_h)
                } else {
                    (-1.0, min_h, max_l)
                };
                terms.push(PlanTerm {
                    kind: TermKind::Qu,
                    coefficient,
                    case_id: case,
                    geometry: TermGeometry::Qu(SegmentPairConfig::new(p_a, p_b, g.q_at(t0), g.q_at(t1))?),
                });
            }
            let mut dpent = |label: Label, near: f64, far: f64| -> Result<()> {
                let Label::Vertex(i) = label else {
                    unreachable!("only vertex limiters move")
                };
                let cfg = DPentConfig::new(p_a, p_b, g.blockers[i], g.q_at(near), g.q_at(far))?;
                terms.push(PlanTerm {
                    kind: TermKind::Dpent,
                    coefficient: 1.0,
                    case_id: case,
                    geometry: TermGeometry::Dpent(cfg),
                });
                Ok(())
            };
            if lo_vertex {
                dpent(lo, max_l, min_l)?;
            }
            if hi_vertex {
                dpent(hi, min_h, max_h)?;
            }
        }
        if !terms.is_empty() {
            plan.pieces.push(SubSegment { p_a, p_b, terms });
        }
    }
    Ok(plan)
}

/// Plans for every unordered side pair.
pub fn decompose(poly: &Polygon) -> Result<Vec<DecompositionPlan>> {
    let n = poly.edges().len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let plan = decompose_pair(poly, i, j)?;
            if !plan.pieces.is_empty() {
                out.push(plan);
            }
        }
    }
    Ok(out)
}

/// JSON dump of every side pair's plan.
pub fn plan_json(poly: &Polygon) -> Result<String> {
    Ok(serde_json::to_string_pretty(&decompose(poly)?).expect("plans serialize"))
}

#[derive(Clone, Debug)]
enum Compiled {
    Qu(SegmentPairConfig, f64),
    Dpent(DPentConfig, Option<BoundsModel>),
}

/// A polygon compiled into signed terms for one engine.
#[derive(Clone, Debug)]
pub struct McdModel {
    terms: Vec<Compiled>,
    engine: Engine,
    diameter: f64,
    aligned: bool,
}

impl McdModel {
    pub fn new(poly: &Polygon, engine: Engine) -> Result<Self> {
        let plans = decompose(poly)?;
        Self::from_plans(&plans, poly.diameter(), engine)
    }

    pub fn from_plans(plans: &[DecompositionPlan], diameter: f64, engine: Engine) -> Result<Self> {
        let mut terms = Vec::new();
        for t in plans.iter().flat_map(|p| &p.pieces).flat_map(|s| &s.terms) {
            terms.push(match &t.geometry {
                TermGeometry::Qu(cfg) => Compiled::Qu(cfg.clone(), t.coefficient),
                TermGeometry::Dpent(cfg) => {
                    let bounds = match engine {
                        Engine::Bounds { n } => Some(BoundsModel::new(cfg, n)?),
                        _ => None,
                    };
                    Compiled::Dpent(cfg.clone(), bounds)
                }
            });
        }
        Ok(McdModel {
            terms,
            engine,
            diameter,
            aligned: plans.iter().any(|p| p.aligned),
        })
    }

    pub fn eval(&self, ell: f64) -> f64 {
        self.sample(ell).value
    }
}

/// One diagonal-pentagon term under the chosen engine.
fn dpent_sample(cfg: &DPentConfig, bounds: Option<&BoundsModel>, engine: Engine, ell: f64) -> Sample {
    let fail = |e: Error| {
        log::error!("concave term failed at ℓ={ell}: {e}");
        Sample::exact(f64::NAN)
    };
    match (engine, bounds) {
        (Engine::Bounds { .. }, Some(b)) => {
            let r = b.eval(ell);
            Sample {
                value: r.midpoint(),
                lower: r.lower,
                upper: r.upper,
                fell_back: false,
            }
        }
        (Engine::Riemann, _) => match rho_conc_riemann_adaptive(cfg, ell, RIEMANN_START, RIEMANN_REL, 1e-12) {
            Ok(v) => Sample::exact(v),
            Err(e) => fail(e),
        },
        _ => match rho_conc_semianalytic(cfg, ell) {
            Ok(r) => Sample {
                fell_back: r.fell_back,
                ..Sample::exact(r.value)
            },
            Err(e) => fail(e),
        },
    }
}

impl DensityModel for McdModel {
    fn sample(&self, ell: f64) -> Sample {
        self.terms
            .iter()
            .map(|t| match t {
                Compiled::Qu(cfg, k) => Sample::exact(k * cfg.eval(ell)),
                Compiled::Dpent(cfg, b) => dpent_sample(cfg, b.as_ref(), self.engine, ell),
            })
            .fold(Sample::exact(0.0), |acc, s| acc + s)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.terms
            .iter()
            .flat_map(|t| match t {
                Compiled::Qu(cfg, _) => cfg.breakpoints(),
                Compiled::Dpent(cfg, _) => cfg.length_breakpoints(),
            })
            .collect()
    }

    fn singular(&self) -> Vec<f64> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Compiled::Qu(cfg, k) if *k > 0.0 => cfg.singular(),
                Compiled::Qu(..) => None,
                Compiled::Dpent(cfg, _) => cfg.singular(),
            })
            .collect()
    }

    fn support_end(&self) -> f64 {
        self.diameter
    }

    fn engine(&self) -> Engine {
        self.engine
    }

    fn flags(&self) -> Vec<String> {
        if self.aligned {
            vec!["aligned_vertices".into()]
        } else {
            Vec::new()
        }
    }
}

/// Multi-chord density curve of any valid polygon; convex polygons take the
/// closed-form path.
pub fn mcd(poly: &Polygon, grid: &GridSpec, engine: Engine) -> Result<DensityCurve> {
    if poly.is_convex() {
        return convex::sample_curve(poly, grid, engine);
    }
    mcd_decomposed(poly, grid, engine)
}

/// Like [`mcd`] but always through the side-pair decomposition.
pub fn mcd_decomposed(poly: &Polygon, grid: &GridSpec, engine: Engine) -> Result<DensityCurve> {
    let curve = sample_model(&McdModel::new(poly, engine)?, grid)?;
    Ok(curve)
}

/// Either path as a density model.
pub enum AnyModel {
    Convex(ConvexMcd),
    General(McdModel),
}

impl AnyModel {
    pub fn new(poly: &Polygon, engine: Engine) -> Result<Self> {
        if poly.is_convex() {
            Ok(AnyModel::Convex(ConvexMcd::with_engine(poly, engine)?))
        } else {
            Ok(AnyModel::General(McdModel::new(poly, engine)?))
        }
    }

    fn inner(&self) -> &dyn DensityModel {
        match self {
            AnyModel::Convex(m) => m,
            AnyModel::General(m) => m,
        }
    }
}

impl DensityModel for AnyModel {
    fn sample(&self, ell: f64) -> Sample {
        self.inner().sample(ell)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner().breakpoints()
    }
    fn singular(&self) -> Vec<f64> {
        self.inner().singular()
    }
    fn support_end(&self) -> f64 {
        self.inner().support_end()
    }
    fn engine(&self) -> Engine {
        self.inner().engine()
    }
    fn flags(&self) -> Vec<String> {
        self.inner().flags()
    }
}
