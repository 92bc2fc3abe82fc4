//! Monte Carlo chord sampling under the invariant line measure.
//!
//! A line is drawn with direction θ uniform on [0, π) and offset uniform on
//! the polygon's support extent in the normal direction, so each line
//! carries weight π·width(θ). Every connected piece of its intersection with
//! the polygon is one chord.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{Point, Polygon, TAU_DEG};
use crate::{Error, Result};

/// Lines per independent random stream.
const BLOCK: usize = 4096;
/// Redraws allowed for lines grazing a vertex before giving up on a line.
const MAX_REDRAWS: usize = 64;

/// One chord: a connected component of a line inside the polygon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Component {
    pub length: f64,
    /// Edge index (into [`Polygon::edges`]) and point where the chord starts.
    pub start: (usize, Point),
    pub end: (usize, Point),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChordSample {
    pub theta: f64,
    pub offset: f64,
    /// Measure carried by the line, π times the support width.
    pub weight: f64,
    /// Components in order along the line.
    pub components: Vec<Component>,
}

impl ChordSample {
    pub fn lengths(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.length).collect()
    }
}

struct Sampler {
    edges: Vec<(Point, Point)>,
    hull: Vec<Point>,
    tol: f64,
}

impl Sampler {
    fn new(poly: &Polygon) -> Self {
        Sampler {
            edges: poly.edges().iter().map(|e| (e.a, e.b)).collect(),
            hull: poly.outer().to_vec(),
            tol: TAU_DEG * poly.length_scale(),
        }
    }

    fn extent(&self, n: Point) -> (f64, f64) {
        self.hull
            .iter()
            .map(|v| v.dot(n))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }

    /// Components of the line `x·n = p`, or `None` if it passes too close
    /// to a vertex.
    fn cut(&self, n: Point, p: f64) -> Option<Vec<Component>> {
        let u = Point::new(-n.y, n.x);
        let mut hits: Vec<(f64, usize, Point)> = Vec::new();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            let (da, db) = (a.dot(n) - p, b.dot(n) - p);
            if da.abs() <= self.tol || db.abs() <= self.tol {
                return None;
            }
            if (da < 0.0) != (db < 0.0) {
                let x = a + (b - a) * (da / (da - db));
                hits.push((x.dot(u), k, x));
            }
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        Some(
            hits.chunks_exact(2)
                .map(|w| Component {
                    length: w[1].2.dist(w[0].2),
                    start: (w[0].1, w[0].2),
                    end: (w[1].1, w[1].2),
                })
                .collect(),
        )
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> ChordSample {
        for _ in 0..MAX_REDRAWS {
            let theta = rng.gen_range(0.0..PI);
            let n = Point::new(theta.cos(), theta.sin());
            let (lo, hi) = self.extent(n);
            let offset = rng.gen_range(lo..hi);
            if let Some(components) = self.cut(n, offset) {
                return ChordSample {
                    theta,
                    offset,
                    weight: PI * (hi - lo),
                    components,
                };
            }
            log::debug!("line θ={theta} p={offset} grazes a vertex; redrawing");
        }
        unreachable!("vertex grazing has probability zero")
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Apply `f` to every sampled line, block by block in parallel, and
/// combine the per-block results in block order.
fn fold_lines<T: Send>(
    poly: &Polygon,
    n_lines: usize,
    seed: u64,
    init: impl Fn() -> T + Sync,
    f: impl Fn(&mut T, ChordSample) + Sync,
) -> Vec<T> {
    let sampler = Sampler::new(poly);
    let blocks = n_lines.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let mut acc = init();
            for _ in b * BLOCK..((b + 1) * BLOCK).min(n_lines) {
                f(&mut acc, sampler.draw(&mut rng));
            }
            acc
        })
        .collect()
}

/// `n_lines` lines with their chords; identical for identical seeds.
pub fn sample_chords(poly: &Polygon, n_lines: usize, seed: u64) -> Vec<ChordSample> {
    fold_lines(poly, n_lines, seed, Vec::new, |v, s| v.push(s))
        .into_iter()
        .flatten()
        .collect()
}

/// Histogram of chord lengths as measure per bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub bin_edges: Vec<f64>,
    /// Estimated measure of chords with length in each bin.
    pub mass: Vec<f64>,
    pub stderr: Vec<f64>,
    pub total_lines: usize,
    pub seed: u64,
    /// Set when some bin received no chords.
    pub empty_bins: bool,
    /// Divisor applied by [`EmpiricalDensity::normalize`], if any.
    #[serde(default)]
    pub normalized_by: Option<f64>,
}

/// Sidecar for a histogram CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramMeta {
    pub seed: u64,
    pub n_lines: usize,
    pub bins: usize,
    pub empty_bins: bool,
    pub normalized_by: Option<f64>,
}

#[derive(Clone, Debug)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    lines: usize,
}

impl Moments {
    fn new(bins: usize) -> Self {
        Moments {
            sum: vec![0.0; bins],
            sum_sq: vec![0.0; bins],
            lines: 0,
        }
    }

    /// One line's contribution: its weight times its chord count per bin.
    fn add(&mut self, edges: &[f64], s: &ChordSample, keep: &impl Fn(&Component) -> bool, scratch: &mut Vec<(usize, f64)>) {
        self.lines += 1;
        scratch.clear();
        for c in s.components.iter().filter(|c| keep(c)) {
            if let Some(b) = bin_of(edges, c.length) {
                match scratch.iter_mut().find(|(k, _)| *k == b) {
                    Some(e) => e.1 += s.weight,
                    None => scratch.push((b, s.weight)),
                }
            }
        }
        for &(b, x) in scratch.iter() {
            self.sum[b] += x;
            self.sum_sq[b] += x * x;
        }
    }

    fn merge(mut self, o: Moments) -> Moments {
        for b in 0..self.sum.len() {
            self.sum[b] += o.sum[b];
            self.sum_sq[b] += o.sum_sq[b];
        }
        self.lines += o.lines;
        self
    }
}

fn bin_of(edges: &[f64], x: f64) -> Option<usize> {
    if !(x >= edges[0] && x < edges[edges.len() - 1]) {
        return None;
    }
    Some(edges.partition_point(|e| *e <= x) - 1)
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidGrid("bin edges must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn finish(m: Moments, bin_edges: &[f64], seed: u64) -> EmpiricalDensity {
    let n = m.lines.max(1) as f64;
    let mass: Vec<f64> = m.sum.iter().map(|s| s / n).collect();
    let stderr = m
        .sum
        .iter()
        .zip(&m.sum_sq)
        .map(|(s, q)| {
            let mean = s / n;
            ((q / n - mean * mean).max(0.0) / (n - 1.0).max(1.0)).sqrt()
        })
        .collect();
    EmpiricalDensity {
        empty_bins: m.sum.iter().any(|s| *s == 0.0),
        normalized_by: None,
        bin_edges: bin_edges.to_vec(),
        mass,
        stderr,
        total_lines: m.lines,
        seed,
    }
}

/// Histogram from materialized samples.
pub fn empirical_density(samples: &[ChordSample], bin_edges: &[f64], seed: u64) -> Result<EmpiricalDensity> {
    check_edges(bin_edges)?;
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no samples".into()));
    }
    let mut m = Moments::new(bin_edges.len() - 1);
    let mut scratch = Vec::new();
    for s in samples {
        m.add(bin_edges, s, &|_| true, &mut scratch);
    }
    let out = finish(m, bin_edges, seed);
    if out.empty_bins {
        log::warn!("empirical density has empty bins");
    }
    Ok(out)
}

/// Streamed histogram of the chords accepted by `keep`.
pub fn monte_carlo_filtered(
    poly: &Polygon,
    n_lines: usize,
    seed: u64,
    bin_edges: &[f64],
    keep: impl Fn(&Component) -> bool + Sync,
) -> Result<EmpiricalDensity> {
    check_edges(bin_edges)?;
    if n_lines == 0 {
        return Err(Error::InvalidConfig("need at least one line".into()));
    }
    let bins = bin_edges.len() - 1;
    let parts = fold_lines(
        poly,
        n_lines,
        seed,
        || (Moments::new(bins), Vec::new()),
        |(m, scratch), s| m.add(bin_edges, &s, &keep, scratch),
    );
    let m = parts
        .into_iter()
        .map(|(m, _)| m)
        .reduce(Moments::merge)
        .expect("at least one block");
    Ok(finish(m, bin_edges, seed))
}

/// Streamed histogram of all chords.
pub fn monte_carlo(poly: &Polygon, n_lines: usize, seed: u64, bin_edges: &[f64]) -> Result<EmpiricalDensity> {
    monte_carlo_filtered(poly, n_lines, seed, bin_edges, |_| true)
}

/// `n` equal bins on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

/// Mean chord length with its standard error (ratio estimator).
pub fn mean_chord_length(samples: &[ChordSample]) -> (f64, f64) {
    let n = samples.len() as f64;
    let y: Vec<f64> = samples
        .iter()
        .map(|s| s.weight * s.components.iter().map(|c| c.length).sum::<f64>())
        .collect();
    let z: Vec<f64> = samples.iter().map(|s| s.weight * s.components.len() as f64).collect();
    let r = y.iter().sum::<f64>() / z.iter().sum::<f64>();
    let zbar = z.iter().sum::<f64>() / n;
    let resid: Vec<f64> = y.iter().zip(&z).map(|(y, z)| y - r * z).collect();
    let rbar = resid.iter().sum::<f64>() / n;
    let var = resid.iter().map(|e| (e - rbar).powi(2)).sum::<f64>() / (n - 1.0);
    (r, (var / n).sqrt() / zbar)
}

impl EmpiricalDensity {
    /// Mass divided by bin width.
    pub fn density(&self) -> Vec<f64> {
        self.mass
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect()
    }

    /// Divide mass and standard errors by the total estimated mass.
    pub fn normalize(&mut self) -> Result<()> {
        let total: f64 = self.mass.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidConfig(format!("cannot normalize by {total}")));
        }
        self.mass.iter_mut().for_each(|m| *m /= total);
        self.stderr.iter_mut().for_each(|e| *e /= total);
        self.normalized_by = Some(total);
        Ok(())
    }

    pub fn meta(&self) -> HistogramMeta {
        HistogramMeta {
            seed: self.seed,
            n_lines: self.total_lines,
            bins: self.mass.len(),
            empty_bins: self.empty_bins,
            normalized_by: self.normalized_by,
        }
    }

    /// CSV with header `ell_lo,ell_hi,mass,stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ell_lo", "ell_hi", "mass", "stderr"])?;
        for (i, e) in self.bin_edges.windows(2).enumerate() {
            w.write_record([e[0], e[1], self.mass[i], self.stderr[i]].map(|x| x.to_string()))?;
        }
        w.flush()
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta()).expect("histogram metadata serializes")
    }
}
