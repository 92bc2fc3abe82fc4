#![allow(dead_code)]

use std::f64::consts::TAU;

use polychord::geom::{Point, Polygon};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

/// Sorted angles on the circle with every gap at least `min_gap`.
fn spread_angles(raw: Vec<f64>, min_gap: f64) -> Option<Vec<f64>> {
    let mut a = raw;
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let ok = (0..n).all(|i| {
        let next = if i + 1 == n { a[0] + TAU } else { a[i + 1] };
        next - a[i] >= min_gap
    });
    ok.then_some(a)
}

/// Convex polygons with 3 to 10 vertices: points on an ellipse, rotated and
/// shifted.
pub fn convex_polygon() -> impl Strategy<Value = Polygon> {
    (3usize..=10)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(0.0..TAU, n),
                0.3f64..3.0,
                0.3f64..3.0,
                0.0..TAU,
                (-5.0f64..5.0, -5.0f64..5.0),
            )
        })
        .prop_filter_map("vertices too close", |(raw, sx, sy, rot, (dx, dy))| {
            let n = raw.len();
            let angles = spread_angles(raw, 0.5 * TAU / (n as f64 * n as f64))?;
            let ring = angles
                .iter()
                .map(|t| Point::new(sx * t.cos(), sy * t.sin()).rotated(rot) + Point::new(dx, dy))
                .collect();
            Polygon::new(ring).ok().filter(|p| p.is_convex())
        })
}

/// Star-shaped polygons around the origin with 4 to 8 vertices, at least one
/// of them reflex.
pub fn star_shaped_polygon() -> impl Strategy<Value = Polygon> {
    (4usize..=8)
        .prop_flat_map(|n| (proptest::collection::vec(0.0..TAU, n), proptest::collection::vec(0.3f64..1.5, n)))
        .prop_filter_map("not a concave simple polygon", |(raw, radii)| {
            let angles = spread_angles(raw, 0.25)?;
            let ring = angles.iter().zip(&radii).map(|(&t, &r)| Point::polar(r, t)).collect();
            Polygon::new(ring).ok().filter(|p| !p.is_convex())
        })
}

/// Convex polygons inscribed in a circle of radius 2 with a triangular hole
/// near the centre.
pub fn holed_polygon() -> impl Strategy<Value = Polygon> {
    (
        (3usize..=6).prop_flat_map(|n| proptest::collection::vec(0.0..TAU, n)),
        (-0.3f64..0.3, -0.3f64..0.3),
        proptest::array::uniform3(0.1f64..0.6),
        0.0..TAU,
    )
        .prop_filter_map("invalid hole", |(raw, (cx, cy), radii, a0)| {
            let n = raw.len();
            let angles = spread_angles(raw, 0.5 * TAU / (n as f64 * n as f64))?;
            let outer = angles.iter().map(|&t| Point::polar(2.0, t)).collect();
            let c = Point::new(cx, cy);
            let hole = (0..3).map(|k| c + Point::polar(radii[k], a0 + k as f64 * TAU / 3.0)).collect();
            Polygon::with_holes(outer, vec![hole]).ok()
        })
}

/// `count` values of `strategy` from a fixed seed.
pub fn draw<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy yields values").current())
        .collect()
}

/// Relative difference with an absolute floor of one.
pub fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}
