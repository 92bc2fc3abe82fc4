//! Dense real polynomials with just enough machinery to isolate real roots
//! on an interval.

use crate::error::{Error, Result};

/// Coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        Poly { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    fn zip(&self, o: &Poly, f: impl Fn(f64, f64) -> f64) -> Poly {
        let n = self.c.len().max(o.c.len());
        let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Poly::new((0..n).map(|i| f(at(&self.c, i), at(&o.c, i))).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.c.iter().map(|k| k * s).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.c.is_empty() || o.c.is_empty() {
            return Poly::new(Vec::new());
        }
        let mut out = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    fn deriv(&self) -> Poly {
        Poly::new(self.c.iter().enumerate().skip(1).map(|(i, k)| k * i as f64).collect())
    }

    /// Drop leading terms that are negligible over `|x| ≤ reach`.
    fn trimmed(&self, reach: f64) -> Result<Poly> {
        let mags: Vec<f64> = self
            .c
            .iter()
            .enumerate()
            .map(|(i, k)| k.abs() * reach.powi(i as i32))
            .collect();
        let top = mags.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) || !top.is_finite() {
            return Err(Error::RootFindingFailure("polynomial vanishes identically".into()));
        }
        let keep = mags.iter().rposition(|m| *m > 1e-13 * top).unwrap_or(0);
        Ok(Poly::new(self.c[..=keep].to_vec()))
    }

    /// Real roots in `[lo, hi]`, located between critical points by bisection.
    /// Roots of even multiplicity are not reported.
    pub fn real_roots(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let reach = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let p = self.trimmed(reach)?;
        let deg = p.c.len() - 1;
        if deg == 0 {
            return Ok(Vec::new());
        }
        if deg == 1 {
            let r = -p.c[0] / p.c[1];
            return Ok(if r >= lo && r <= hi { vec![r] } else { Vec::new() });
        }
        let mut knots = vec![lo];
        knots.extend(p.deriv().real_roots(lo, hi).unwrap_or_default());
        knots.push(hi);
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (fa, fb) = (p.eval(a), p.eval(b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa.signum() == fb.signum() || fb == 0.0 {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if p.eval(m).signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        if p.eval(hi) == 0.0 {
            roots.push(hi);
        }
        roots.dedup();
        Ok(roots)
    }
}
