//! Piecewise quadrature over breakpoint-delimited intervals.

use quadrature::double_exponential;

const MAX_DEPTH: usize = 12;

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let out = double_exponential::integrate(f, a, b, tol);
    if depth == 0 || out.error_estimate <= tol * (1.0 + out.integral.abs()) {
        return out.integral;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol, depth - 1) + adaptive(f, m, b, tol, depth - 1)
}

/// ∫ f over `[knots[0], knots[last]]`, integrating each gap between sorted
/// knots separately so kinks and endpoint singularities sit on interval ends.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, knots: &[f64], tol: f64) -> f64 {
    let mut k: Vec<f64> = knots.iter().copied().filter(|x| x.is_finite()).collect();
    k.sort_by(f64::total_cmp);
    k.dedup();
    k.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive(&f, w[0], w[1], tol, MAX_DEPTH))
        .sum()
}

/// Zeroth and first moments `(∫ρ, ∫ℓρ)` over `(0, end]`.
pub fn moments(f: impl Fn(f64) -> f64, breakpoints: &[f64], end: f64, tol: f64) -> (f64, f64) {
    let mut knots: Vec<f64> = breakpoints.iter().copied().filter(|b| *b > 0.0 && *b < end).collect();
    knots.push(0.0);
    knots.push(end);
    let m0 = integrate_pieces(&f, &knots, tol);
    let m1 = integrate_pieces(|l| l * f(l), &knots, tol);
    (m0, m1)
}
