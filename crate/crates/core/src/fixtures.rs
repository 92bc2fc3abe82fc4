//! Polygon files and the reference polygons.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geom::{Point, Polygon};
use crate::Result;

/// On-disk polygon: outer ring and optional holes as `[x, y]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub outer: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<Vec<[f64; 2]>>,
}

impl PolygonFile {
    pub fn polygon(&self) -> Result<Polygon> {
        let ring = |r: &[[f64; 2]]| r.iter().map(|&c| Point::from(c)).collect::<Vec<_>>();
        Polygon::with_holes(ring(&self.outer), self.holes.iter().map(|h| ring(h)).collect())
    }

    pub fn from_polygon(name: &str, description: &str, poly: &Polygon) -> Self {
        let ring = |r: &[Point]| r.iter().map(|&p| p.into()).collect::<Vec<[f64; 2]>>();
        PolygonFile {
            name: name.into(),
            description: description.into(),
            outer: ring(poly.outer()),
            holes: poly.holes().iter().map(|h| ring(h)).collect(),
        }
    }
}

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub polygon: Polygon,
}

impl Fixture {
    pub fn file(&self) -> PolygonFile {
        PolygonFile::from_polygon(self.name, self.description, &self.polygon)
    }
}

fn poly(pts: &[[f64; 2]]) -> Polygon {
    Polygon::from_coords(pts).expect("fixture polygons are valid")
}

pub fn equilateral() -> Polygon {
    poly(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]])
}

pub fn right_345() -> Polygon {
    poly(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]])
}

pub fn square() -> Polygon {
    poly(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
}

/// Unit sides, 60° acute angle.
pub fn rhombus() -> Polygon {
    let h = 0.75f64.sqrt();
    poly(&[[0.0, 0.0], [1.0, 0.0], [1.5, h], [0.5, h]])
}

fn octagon() -> [Point; 8] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[1.0, 0.0], [s, s], [0.0, 1.0], [-s, s], [-1.0, 0.0], [-s, -s], [0.0, -1.0], [s, -s]].map(Point::from)
}

/// Octagon vertex `k` followed, when `bump` is set, by the scaled midpoint
/// of the edge to vertex `k + 1`.
fn dodecagon(bumps: [usize; 4]) -> Polygon {
    let o = octagon();
    let mut ring = Vec::new();
    for k in 0..8 {
        ring.push(o[k]);
        if bumps.contains(&k) {
            ring.push((o[k] + o[(k + 1) % 8]) * 0.55);
        }
    }
    Polygon::new(ring).expect("dodecagons are valid")
}

/// Octagon with bumps on the edges AB, BC, DE, EF.
pub fn dodecagon_a() -> Polygon {
    dodecagon([0, 1, 3, 4])
}

/// Octagon with bumps on the edges AB, DE, EF, FG.
pub fn dodecagon_b() -> Polygon {
    dodecagon([0, 3, 4, 5])
}

/// Concave quadrilateral O A V D with the reflex vertex V.
pub fn quadrilateral() -> Polygon {
    poly(&[[0.0, 0.0], [2.2, 0.0], [0.7, 0.5], [0.3, 1.9]])
}

/// Unit square B C D E with the concave vertex A at its centre.
pub fn pentagon() -> Polygon {
    poly(&[[0.5, 0.5], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
}

/// Pentagon A B C D E with a reflex vertex A that is not a diagonal crossing.
pub fn pentagon_asymmetric() -> Polygon {
    poly(&[[0.8, 0.7], [0.0, 1.2], [0.0, 0.0], [2.0, 0.0], [1.6, 1.7]])
}

/// Inner radius of the five-pointed star with outer radius 1.
pub fn star_inner_radius() -> f64 {
    (PI / 10.0).sin() / (7.0 * PI / 10.0).sin()
}

/// Five-pointed star A..J: outer vertices at angles π/10 + 2kπ/5, inner
/// vertices halfway between.
pub fn star() -> Polygon {
    let r = star_inner_radius();
    let ring = (0..10)
        .map(|k| {
            let theta = PI / 10.0 + k as f64 * PI / 5.0;
            Point::polar(if k % 2 == 0 { 1.0 } else { r }, theta)
        })
        .collect();
    Polygon::new(ring).expect("the star is valid")
}

/// Square of side 3 with a centred square hole of side 1.
pub fn square_with_hole() -> Polygon {
    let ring = |lo: f64, hi: f64| {
        vec![Point::new(lo, lo), Point::new(hi, lo), Point::new(hi, hi), Point::new(lo, hi)]
    };
    Polygon::with_holes(ring(0.0, 3.0), vec![ring(1.0, 2.0)]).expect("holed square is valid")
}

pub fn all() -> Vec<Fixture> {
    let f = |name, description, polygon| Fixture {
        name,
        description,
        polygon,
    };
    vec![
        f("equilateral", "equilateral triangle with unit sides", equilateral()),
        f("right_345", "3-4-5 right triangle", right_345()),
        f("square", "unit square", square()),
        f("rhombus", "rhombus with unit sides and a 60 degree angle", rhombus()),
        f("dodecagon_a", "octagon with bumps on AB, BC, DE, EF", dodecagon_a()),
        f("dodecagon_b", "octagon with bumps on AB, DE, EF, FG", dodecagon_b()),
        f("quadrilateral", "concave quadrilateral OAVD", quadrilateral()),
        f("pentagon", "unit square with its left side folded to the centre", pentagon()),
        f("pentagon_asymmetric", "pentagon with a reflex vertex off the diagonals", pentagon_asymmetric()),
        f("star", "five-pointed star with outer radius 1", star()),
        f("square_with_hole", "square of side 3 with a centred square hole of side 1", square_with_hole()),
    ]
}

pub fn by_name(name: &str) -> Option<Fixture> {
    all().into_iter().find(|f| f.name == name)
}
