//! Sampled density curves, grids and engines.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quad;
use crate::{Error, Result};

/// Grid abscissae closer than this to a singular point are moved off it.
pub const TAU_SING: f64 = 1e-9;
/// Point count of the automatic grid.
pub const AUTO_POINTS: usize = 512;
/// Piece count of the bounds engine when none is given.
pub const DEFAULT_BOUNDS_N: usize = 1000;
/// Relative tolerance of moment quadratures.
pub const QUAD_TOL: f64 = 1e-11;

/// How the concave terms of a polygon are evaluated. Convex pair terms are
/// always closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Engine {
    Analytic,
    Bounds { n: usize },
    Riemann,
    SemiAnalytic,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Bounds { .. } => "bounds",
            Engine::Riemann => "riemann",
            Engine::SemiAnalytic => "semianalytic",
        }
    }
}

/// One evaluation of a density model. `lower` and `upper` equal `value`
/// unless the engine produces an envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub fell_back: bool,
}

impl Sample {
    pub fn exact(value: f64) -> Self {
        Sample {
            value,
            lower: value,
            upper: value,
            fell_back: false,
        }
    }
}

impl std::ops::Add for Sample {
    type Output = Sample;
    fn add(self, o: Sample) -> Sample {
        Sample {
            value: self.value + o.value,
            lower: self.lower + o.lower,
            upper: self.upper + o.upper,
            fell_back: self.fell_back || o.fell_back,
        }
    }
}

/// A chord-length density ready for sampling.
pub trait DensityModel: Sync {
    fn sample(&self, ell: f64) -> Sample;
    /// Superset of the lengths where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64>;
    /// Lengths where the density diverges.
    fn singular(&self) -> Vec<f64>;
    /// Every chord is at most this long.
    fn support_end(&self) -> f64;
    fn engine(&self) -> Engine;
    fn flags(&self) -> Vec<String> {
        Vec::new()
    }
}

/// `(∫ρ dℓ, ∫ℓρ dℓ)` by quadrature split at the model's breakpoints.
pub fn moments(model: &impl DensityModel) -> (f64, f64) {
    quad::moments(|l| model.sample(l).value, &model.breakpoints(), model.support_end(), QUAD_TOL)
}

/// `∫ρ dℓ` over each bin `[edges[i], edges[i+1]]`, split at breakpoints.
pub fn bin_masses(model: &impl DensityModel, edges: &[f64]) -> Vec<f64> {
    let bps = model.breakpoints();
    edges
        .par_windows(2)
        .map(|w| {
            let mut knots: Vec<f64> = bps.iter().copied().filter(|b| *b > w[0] && *b < w[1]).collect();
            knots.extend([w[0], w[1]]);
            quad::integrate_pieces(|l| model.sample(l).value, &knots, QUAD_TOL)
        })
        .collect()
}

/// Where a curve is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// `points` evenly spaced abscissae from `min` to `max` inclusive.
    Range { min: f64, max: f64, points: usize },
    Explicit(Vec<f64>),
    /// `points` evenly spaced abscissae on `(0, diameter]`.
    Auto { points: usize },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto {
            points: AUTO_POINTS,
        }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// `auto` or `MIN:MAX:N`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(GridSpec::default());
        }
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::InvalidGrid(format!("expected auto or MIN:MAX:N, got {s:?}"));
        let [min, max, n] = parts.as_slice() else {
            return Err(bad());
        };
        let spec = GridSpec::Range {
            min: min.parse().map_err(|_| bad())?,
            max: max.parse().map_err(|_| bad())?,
            points: n.parse().map_err(|_| bad())?,
        };
        spec.check()?;
        Ok(spec)
    }
}

impl GridSpec {
    fn check(&self) -> Result<()> {
        match self {
            GridSpec::Range { min, max, points } => {
                if !(min.is_finite() && max.is_finite() && *min > 0.0 && max > min) {
                    return Err(Error::InvalidGrid(format!("need max > min > 0, got {min}..{max}")));
                }
                if *points < 2 {
                    return Err(Error::InvalidGrid("need at least two points".into()));
                }
            }
            GridSpec::Explicit(xs) => {
                if xs.is_empty() || xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::InvalidGrid("abscissae must be positive and finite".into()));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidGrid("abscissae must increase strictly".into()));
                }
            }
            GridSpec::Auto { points } => {
                if *points < 2 {
                    return Err(Error::InvalidGrid("need at least two points".into()));
                }
            }
        }
        Ok(())
    }

    /// Abscissae for a figure of the given diameter, moved off `singular`.
    pub fn abscissae(&self, diameter: f64, singular: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        let linspace = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        };
        let mut xs = match self {
            GridSpec::Range { min, max, points } => linspace(*min, *max, *points),
            GridSpec::Explicit(xs) => xs.clone(),
            GridSpec::Auto { points } => (1..=*points)
                .map(|k| diameter * k as f64 / *points as f64)
                .collect(),
        };
        for x in xs.iter_mut() {
            for &s in singular {
                let tol = TAU_SING * s.max(1.0);
                if (*x - s).abs() <= tol {
                    *x = if *x < s { s - 2.0 * tol } else { s + 2.0 * tol };
                }
            }
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "abscissae collide after moving off singular points".into(),
            ));
        }
        Ok(xs)
    }
}

/// A density sampled on a grid, with optional lower/upper envelopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub breakpoints: Vec<f64>,
    pub singular: Vec<f64>,
    pub engine: Option<Engine>,
    pub flags: Vec<String>,
    /// Divisor applied by [`DensityCurve::normalize`], if any.
    pub normalized_by: Option<f64>,
}

/// The JSON sidecar written next to a curve CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub engine: Option<Engine>,
    pub points: usize,
    pub breakpoints: Vec<f64>,
    pub singular: Vec<f64>,
    pub flags: Vec<String>,
    pub normalized_by: Option<f64>,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|x| x.is_finite() && *x > 0.0);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|b, a| *b - *a <= 1e-12 * *a);
    v
}

/// Evaluate `model` on the grid, in parallel, in grid order.
pub fn sample_model(model: &impl DensityModel, grid: &GridSpec) -> Result<DensityCurve> {
    let singular = sorted_unique(model.singular());
    let xs = grid.abscissae(model.support_end(), &singular)?;
    let samples: Vec<Sample> = xs.par_iter().map(|&l| model.sample(l)).collect();
    if let Some(i) = samples.iter().position(|s| !s.value.is_finite()) {
        return Err(Error::EngineFailure(format!("non-finite density at ℓ={}", xs[i])));
    }
    let engine = model.engine();
    let bounded = matches!(engine, Engine::Bounds { .. });
    let mut flags = model.flags();
    if samples.iter().any(|s| s.fell_back) {
        flags.push("semianalytic_fallback".into());
    }
    Ok(DensityCurve {
        values: samples.iter().map(|s| s.value.max(0.0)).collect(),
        lower: bounded.then(|| samples.iter().map(|s| s.lower.max(0.0)).collect()),
        upper: bounded.then(|| samples.iter().map(|s| s.upper.max(0.0)).collect()),
        grid: xs,
        breakpoints: sorted_unique(model.breakpoints())
            .into_iter()
            .filter(|b| *b <= model.support_end() * (1.0 + 1e-12))
            .collect(),
        singular,
        engine: Some(engine),
        flags,
        normalized_by: None,
    })
}

impl DensityCurve {
    /// Divide every channel by `total`.
    pub fn normalize(&mut self, total: f64) -> Result<()> {
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidConfig(format!("cannot normalize by {total}")));
        }
        let div = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x /= total);
        div(&mut self.values);
        self.lower.as_mut().map(div);
        self.upper.as_mut().map(div);
        self.normalized_by = Some(total);
        Ok(())
    }

    pub fn meta(&self) -> CurveMeta {
        CurveMeta {
            engine: self.engine,
            points: self.grid.len(),
            breakpoints: self.breakpoints.clone(),
            singular: self.singular.clone(),
            flags: self.flags.clone(),
            normalized_by: self.normalized_by,
        }
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta()).expect("curve metadata serializes")
    }

    /// CSV with header `ell,density` (plus `lower,upper` for envelopes).
    /// Numbers use the shortest form that parses back to the same value.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let env = self.lower.as_ref().zip(self.upper.as_ref());
        if env.is_some() {
            w.write_record(["ell", "density", "lower", "upper"])?;
        } else {
            w.write_record(["ell", "density"])?;
        }
        for (i, (x, v)) in self.grid.iter().zip(&self.values).enumerate() {
            match env {
                Some((lo, up)) => w.write_record([x, v, &lo[i], &up[i]].map(|z| z.to_string()))?,
                None => w.write_record([x, v].map(|z| z.to_string()))?,
            }
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Read a curve written by [`DensityCurve::write_csv`]. Annotations
    /// live in the sidecar and come back empty.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let bad = |m: String| Error::DegenerateInput(format!("curve csv: {m}"));
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let env = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["ell", "density"] => false,
            ["ell", "density", "lower", "upper"] => true,
            h => return Err(bad(format!("unexpected header {h:?}"))),
        };
        let (mut grid, mut values, mut lower, mut upper) = (vec![], vec![], vec![], vec![]);
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?;
            grid.push(nums[0]);
            values.push(nums[1]);
            if env {
                lower.push(nums[2]);
                upper.push(nums[3]);
            }
        }
        Ok(DensityCurve {
            grid,
            values,
            lower: env.then_some(lower),
            upper: env.then_some(upper),
            breakpoints: vec![],
            singular: vec![],
            engine: None,
            flags: vec![],
            normalized_by: None,
        })
    }

    /// Largest absolute pointwise difference to another curve on the same grid.
    pub fn max_abs_diff(&self, other: &DensityCurve) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("curves are sampled on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
