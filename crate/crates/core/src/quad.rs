//! Composite quadrature on the period `[0, 2π]` with panels split at
//! discontinuities of the integrand.

use std::f64::consts::TAU;

/// Four-point Gauss–Legendre abscissae on `[-1, 1]`.
const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Breakpoints closer than this are treated as the same point.
pub(crate) const MERGE_TOL: f64 = 1e-12;

/// Per-panel rule for composite quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rule {
    /// One-point midpoint rule (second order).
    Midpoint,
    /// Four-point Gauss–Legendre rule (eighth order on smooth panels).
    #[default]
    GaussLegendre4,
}

/// Map an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Integrate `f` over `[lo, hi]` with a single panel of the given rule.
pub fn panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rule: Rule) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    match rule {
        Rule::Midpoint => 2.0 * half * f(mid),
        Rule::GaussLegendre4 => {
            let mut acc = 0.0;
            for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                acc += w * f(mid + half * x);
            }
            acc * half
        }
    }
}

/// Quadrature points and weights of one panel.
pub fn panel_points(lo: f64, hi: f64) -> [(f64, f64); 4] {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut out = [(0.0, 0.0); 4];
    for (k, (x, w)) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()).enumerate() {
        out[k] = (mid + half * x, w * half);
    }
    out
}

/// Sorted, deduplicated angles in `[0, 2π)`.
pub fn canonical_breaks(breaks: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = breaks.into_iter().map(wrap_angle).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|b, a| (*b - *a).abs() <= MERGE_TOL);
    if let (Some(&first), Some(&last)) = (v.first(), v.last()) {
        if v.len() > 1 && TAU - last + first <= MERGE_TOL {
            v.pop();
        }
    }
    v
}

/// Panel endpoints covering `[0, 2π]`: `panels` uniform panels refined so
/// that every break is an endpoint. First entry is 0, last is 2π.
pub fn panel_nodes(breaks: &[f64], panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    let breaks = canonical_breaks(breaks.iter().copied());
    let h = TAU / panels as f64;
    let mut nodes: Vec<f64> = (0..panels)
        .map(|j| j as f64 * h)
        .filter(|x| breaks.iter().all(|b| (x - b).abs() > MERGE_TOL))
        .collect();
    nodes.extend(breaks);
    nodes.push(0.0);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|b, a| (*b - *a).abs() <= MERGE_TOL);
    nodes.push(TAU);
    nodes
}

/// Composite integral of `f` over consecutive `nodes`.
pub fn integrate_nodes<F: Fn(f64) -> f64>(f: F, nodes: &[f64], rule: Rule) -> f64 {
    nodes.windows(2).map(|w| panel(&f, w[0], w[1], rule)).sum()
}

/// Integral of `f` over one period, panels aligned with `breaks`.
pub fn integrate_period<F: Fn(f64) -> f64>(f: F, breaks: &[f64], panels: usize, rule: Rule) -> f64 {
    integrate_nodes(f, &panel_nodes(breaks, panels), rule)
}
