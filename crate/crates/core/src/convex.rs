//! Multi-chord density of convex polygons as a sum over side pairs.

use crate::curve::{sample_model, DensityCurve, DensityModel, Engine, GridSpec, Sample};
use crate::geom::{orient, Polygon, TAU_PAR};
use crate::pair::SegmentPairConfig;
use crate::{Error, Result};

/// A convex polygon compiled into its side-pair terms.
#[derive(Clone, Debug)]
pub struct ConvexMcd {
    pairs: Vec<SegmentPairConfig>,
    diameter: f64,
    engine: Engine,
}

impl ConvexMcd {
    pub fn new(poly: &Polygon) -> Result<Self> {
        Self::with_engine(poly, Engine::Analytic)
    }

    /// Every engine reduces to the closed form on convex input; the engine
    /// is only recorded.
    pub fn with_engine(poly: &Polygon, engine: Engine) -> Result<Self> {
        if !poly.is_convex() {
            return Err(Error::NotConvex);
        }
        let edges = poly.edges();
        let s = poly.length_scale();
        let mut pairs = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            for f in &edges[i + 1..] {
                // sides on one line bound no chords
                if orient(e.a, e.b, f.a).abs() <= TAU_PAR * s * s
                    && orient(e.a, e.b, f.b).abs() <= TAU_PAR * s * s
                {
                    continue;
                }
                pairs.push(SegmentPairConfig::new(e.a, e.b, f.a, f.b)?);
            }
        }
        Ok(ConvexMcd {
            pairs,
            diameter: poly.diameter(),
            engine,
        })
    }

    pub fn pairs(&self) -> &[SegmentPairConfig] {
        &self.pairs
    }

    pub fn eval(&self, ell: f64) -> f64 {
        self.pairs.iter().map(|p| p.eval(ell)).sum()
    }
}

impl DensityModel for ConvexMcd {
    fn sample(&self, ell: f64) -> Sample {
        Sample::exact(self.eval(ell))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.pairs.iter().flat_map(|p| p.breakpoints()).collect()
    }

    fn singular(&self) -> Vec<f64> {
        self.pairs.iter().filter_map(|p| p.singular()).collect()
    }

    fn support_end(&self) -> f64 {
        self.diameter
    }

    fn engine(&self) -> Engine {
        self.engine
    }
}

/// Density of chords of length `ell` in a convex polygon.
pub fn convex_mcd(poly: &Polygon, ell: f64) -> Result<f64> {
    Ok(ConvexMcd::new(poly)?.eval(ell))
}

pub fn sample_curve(poly: &Polygon, grid: &GridSpec, engine: Engine) -> Result<DensityCurve> {
    sample_model(&ConvexMcd::with_engine(poly, engine)?, grid)
}
