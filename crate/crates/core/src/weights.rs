//! 2π-periodic weights bounded above and away from zero.
//!
//! Two representations are supported. Piecewise-constant weights carry their
//! breakpoints and are integrated exactly. Closed-form weights wrap an
//! arbitrary evaluator; they are integrated with composite Gauss–Legendre
//! panels whose endpoints include any declared jump locations, and the
//! running integral is tabulated once at construction.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, WirtingerError};
use crate::quad::{self, canonical_breaks, wrap_angle, Rule, MERGE_TOL};

/// Weights whose infimum falls at or below this are rejected.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Probe grid size for the bounds of closed-form weights.
pub const DEFAULT_PROBES: usize = 4096;
/// Panels per period for closed-form integration.
pub const DEFAULT_PANELS: usize = 2048;

/// Pointwise evaluator of a closed-form weight.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    PiecewiseConstant,
    SampledClosedForm,
}

/// Essential bounds of a weight and its class `inf = 1, sup = L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassMembership {
    pub inf: f64,
    pub sup: f64,
    /// `inf == 1` within `1e-9`.
    pub is_normalized: bool,
    /// `sup / inf`, the `L` (or `M`) of the class.
    pub ratio: f64,
}

impl ClassMembership {
    fn new(inf: f64, sup: f64) -> Self {
        ClassMembership {
            inf,
            sup,
            is_normalized: (inf - 1.0).abs() <= 1e-9,
            ratio: sup / inf,
        }
    }
}

/// An immutable 2π-periodic weight. Cloning is cheap.
#[derive(Clone)]
pub struct PeriodicWeight(Arc<Inner>);

struct Inner {
    label: String,
    shape: Shape,
    bounds: ClassMembership,
    declared: Option<(f64, f64)>,
}

enum Shape {
    Piecewise(Piecewise),
    Closed(Closed),
}

/// Canonical form: `breakpoints[0] == 0`, adjacent values differ.
struct Piecewise {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    /// `cumulative[i] = ∫₀^{breakpoints[i]}`, with the period total appended.
    cumulative: Vec<f64>,
}

struct Closed {
    f: Evaluator,
    jumps: Vec<f64>,
    panels: usize,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Piecewise {
    fn new(breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(WirtingerError::InvalidWeight("no values".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(WirtingerError::InvalidWeight(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if let Some(b) = breakpoints.iter().find(|b| !(0.0..TAU).contains(*b)) {
            return Err(WirtingerError::InvalidWeight(format!(
                "breakpoint {b} outside [0, 2π)"
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WirtingerError::InvalidWeight(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(WirtingerError::InvalidWeight(format!(
                "non-finite value {v}"
            )));
        }

        let mut bps = breakpoints.to_vec();
        let mut vals = values.to_vec();
        if bps[0] > MERGE_TOL {
            bps.insert(0, 0.0);
            vals.insert(0, *values.last().unwrap());
        } else {
            bps[0] = 0.0;
        }
        // Drop intervals of negligible length; the later value wins.
        let mut i = 1;
        while i < bps.len() {
            if bps[i] - bps[i - 1] <= MERGE_TOL {
                vals[i - 1] = vals[i];
                bps.remove(i);
                vals.remove(i);
            } else {
                i += 1;
            }
        }
        if bps.len() > 1 && TAU - bps[bps.len() - 1] <= MERGE_TOL {
            bps.pop();
            vals.pop();
        }
        let mut i = 1;
        while i < bps.len() {
            if vals[i] == vals[i - 1] {
                bps.remove(i);
                vals.remove(i);
            } else {
                i += 1;
            }
        }

        let mut cumulative = Vec::with_capacity(bps.len() + 1);
        let mut acc = 0.0;
        for (k, v) in vals.iter().enumerate() {
            cumulative.push(acc);
            let end = bps.get(k + 1).copied().unwrap_or(TAU);
            acc += v * (end - bps[k]);
        }
        cumulative.push(acc);
        Ok(Piecewise {
            breakpoints: bps,
            values: vals,
            cumulative,
        })
    }

    fn index(&self, r: f64) -> usize {
        // A few ulps of slack so that reduced angles such as π/2 + 2π land on
        // the breakpoint they denote.
        let slack = 4.0 * f64::EPSILON * TAU;
        self.breakpoints.partition_point(|&b| b <= r + slack).max(1) - 1
    }

    fn eval(&self, r: f64) -> f64 {
        self.values[self.index(r)]
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn integral_to(&self, r: f64) -> f64 {
        let i = self.index(r);
        self.cumulative[i] + self.values[i] * (r - self.breakpoints[i])
    }

    fn inverse(&self, y: f64) -> f64 {
        let k = self.values.len();
        let i = self.cumulative[..k].partition_point(|&c| c <= y).max(1) - 1;
        self.breakpoints[i] + (y - self.cumulative[i]) / self.values[i]
    }
}

impl Closed {
    fn new(f: Evaluator, jumps: Vec<f64>, panels: usize) -> Self {
        let jumps = canonical_breaks(jumps);
        let nodes = quad::panel_nodes(&jumps, panels);
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in nodes.windows(2) {
            acc += quad::panel(&|x| f(x), w[0], w[1], Rule::GaussLegendre4);
            cumulative.push(acc);
        }
        Closed {
            f,
            jumps,
            panels,
            nodes,
            cumulative,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn panel_of(&self, r: f64) -> usize {
        let i = self.nodes.partition_point(|&x| x <= r).max(1) - 1;
        i.min(self.nodes.len() - 2)
    }

    fn partial(&self, i: usize, r: f64) -> f64 {
        quad::panel(&|x| (self.f)(x), self.nodes[i], r, Rule::GaussLegendre4)
    }

    fn integral_to(&self, r: f64) -> f64 {
        let i = self.panel_of(r);
        self.cumulative[i] + self.partial(i, r)
    }

    fn inverse(&self, y: f64) -> f64 {
        let last = self.nodes.len() - 2;
        let i = (self.cumulative.partition_point(|&c| c <= y).max(1) - 1).min(last);
        let target = y - self.cumulative[i];
        let (mut lo, mut hi) = (self.nodes[i], self.nodes[i + 1]);
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.partial(i, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn probe_bounds(f: &dyn Fn(f64) -> f64, jumps: &[f64], probes: usize) -> Result<(f64, f64)> {
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    let grid = (0..probes).map(|j| j as f64 * TAU / probes as f64);
    for x in grid.chain(jumps.iter().copied()) {
        let v = f(x);
        if !v.is_finite() {
            return Err(WirtingerError::InvalidWeight(format!(
                "non-finite value {v} at θ = {x}"
            )));
        }
        inf = inf.min(v);
        sup = sup.max(v);
    }
    Ok((inf, sup))
}

impl PeriodicWeight {
    fn from_inner(label: String, shape: Shape, declared: Option<(f64, f64)>) -> Result<Self> {
        let (inf, sup) = match (&shape, declared) {
            (_, Some(bounds)) => bounds,
            (Shape::Piecewise(p), None) => (
                p.values.iter().copied().fold(f64::INFINITY, f64::min),
                p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            (Shape::Closed(c), None) => probe_bounds(&*c.f, &c.jumps, DEFAULT_PROBES)?,
        };
        if !(inf > POSITIVITY_FLOOR) {
            return Err(WirtingerError::NonPositiveWeight {
                inf,
                floor: POSITIVITY_FLOOR,
            });
        }
        if !sup.is_finite() || sup < inf {
            return Err(WirtingerError::InvalidWeight(format!(
                "invalid bounds ({inf}, {sup})"
            )));
        }
        Ok(PeriodicWeight(Arc::new(Inner {
            label,
            shape,
            bounds: ClassMembership::new(inf, sup),
            declared,
        })))
    }

    /// The constant weight `v`.
    pub fn constant(v: f64) -> Result<Self> {
        Self::piecewise_constant(&[0.0], &[v])
    }

    /// Step weight taking `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
    /// the last value wrapping around through `2π` to the first breakpoint.
    pub fn piecewise_constant(breakpoints: &[f64], values: &[f64]) -> Result<Self> {
        let pw = Piecewise::new(breakpoints, values)?;
        let label = if pw.values.len() == 1 {
            format!("const:{}", pw.values[0])
        } else {
            let body: Vec<String> = pw
                .breakpoints
                .iter()
                .zip(&pw.values)
                .map(|(b, v)| format!("{b}={v}"))
                .collect();
            format!("pwc:{}", body.join(","))
        };
        Self::from_inner(label, Shape::Piecewise(pw), None)
    }

    /// Continuous closed-form weight.
    pub fn closed_form<F>(label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::closed_form_with_jumps(label, f, Vec::new())
    }

    /// Closed-form weight that may jump at the listed angles. The evaluator
    /// is called on `[0, 2π)` only.
    pub fn closed_form_with_jumps<F>(
        label: impl Into<String>,
        f: F,
        jumps: Vec<f64>,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let closed = Closed::new(Arc::new(f), jumps, DEFAULT_PANELS);
        Self::from_inner(label.into(), Shape::Closed(closed), None)
    }

    /// `1 + (M − 1)(1 + sin θ)/2`, a smooth member of the class with
    /// `inf = 1`, `sup = M`.
    pub fn sine_family(m: f64) -> Result<Self> {
        if !(m >= 1.0) || !m.is_finite() {
            return Err(WirtingerError::InvalidParameter(format!(
                "sine family needs M ≥ 1, got {m}"
            )));
        }
        Self::closed_form(format!("sine:{m}"), move |t| {
            1.0 + (m - 1.0) * (1.0 + t.sin()) / 2.0
        })?
        .with_declared_bounds(1.0, m)
    }

    /// Replace probed bounds with known essential bounds.
    pub fn with_declared_bounds(&self, inf: f64, sup: f64) -> Result<Self> {
        let shape = self.clone_shape(None);
        Self::from_inner(self.0.label.clone(), shape, Some((inf, sup)))
    }

    /// Rebuild the quadrature table of a closed-form weight with another
    /// panel count. Piecewise-constant weights are returned unchanged.
    pub fn with_panels(&self, panels: usize) -> Self {
        match &self.0.shape {
            Shape::Piecewise(_) => self.clone(),
            Shape::Closed(_) => {
                let shape = self.clone_shape(Some(panels.max(1)));
                PeriodicWeight(Arc::new(Inner {
                    label: self.0.label.clone(),
                    shape,
                    bounds: self.0.bounds,
                    declared: self.0.declared,
                }))
            }
        }
    }

    fn clone_shape(&self, panels: Option<usize>) -> Shape {
        match &self.0.shape {
            Shape::Piecewise(p) => Shape::Piecewise(Piecewise {
                breakpoints: p.breakpoints.clone(),
                values: p.values.clone(),
                cumulative: p.cumulative.clone(),
            }),
            Shape::Closed(c) => Shape::Closed(Closed::new(
                c.f.clone(),
                c.jumps.clone(),
                panels.unwrap_or(c.panels),
            )),
        }
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// Same weight under a different label.
    pub fn relabel(&self, label: impl Into<String>) -> Self {
        PeriodicWeight(Arc::new(Inner {
            label: label.into(),
            shape: self.clone_shape(None),
            bounds: self.0.bounds,
            declared: self.0.declared,
        }))
    }

    pub fn kind(&self) -> WeightKind {
        match self.0.shape {
            Shape::Piecewise(_) => WeightKind::PiecewiseConstant,
            Shape::Closed(_) => WeightKind::SampledClosedForm,
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.kind() == WeightKind::PiecewiseConstant
    }

    /// `(breakpoints, values)` of a piecewise-constant weight.
    pub fn pieces(&self) -> Option<(&[f64], &[f64])> {
        match &self.0.shape {
            Shape::Piecewise(p) => Some((&p.breakpoints, &p.values)),
            Shape::Closed(_) => None,
        }
    }

    /// Locations in `[0, 2π)` where the weight may jump: the breakpoints of
    /// a step weight, or the declared jumps of a closed-form one.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.0.shape {
            Shape::Piecewise(p) => &p.breakpoints,
            Shape::Closed(c) => &c.jumps,
        }
    }

    /// `w(θ mod 2π)`; step intervals are closed on the left.
    pub fn eval(&self, theta: f64) -> f64 {
        let r = wrap_angle(theta);
        match &self.0.shape {
            Shape::Piecewise(p) => p.eval(r),
            Shape::Closed(c) => c.eval(r),
        }
    }

    pub fn ess_bounds(&self) -> ClassMembership {
        self.0.bounds
    }

    /// `∫₀^{2π} w`.
    pub fn total(&self) -> f64 {
        match &self.0.shape {
            Shape::Piecewise(p) => p.total(),
            Shape::Closed(c) => c.total(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.total() / TAU
    }

    /// `∫₀^θ w` for any real `θ`, with `A(θ + 2π) = A(θ) + ∫₀^{2π} w`.
    pub fn antiderivative(&self, theta: f64) -> f64 {
        let r = wrap_angle(theta);
        let periods = ((theta - r) / TAU).round();
        let within = match &self.0.shape {
            Shape::Piecewise(p) => p.integral_to(r),
            Shape::Closed(c) => c.integral_to(r),
        };
        periods * self.total() + within
    }

    /// The `θ` with `antiderivative(θ) = y`.
    pub fn inverse_antiderivative(&self, y: f64) -> f64 {
        let total = self.total();
        let mut periods = (y / total).floor();
        let mut r = y - periods * total;
        if r >= total {
            r -= total;
            periods += 1.0;
        }
        if r < 0.0 {
            r = 0.0;
        }
        let within = match &self.0.shape {
            Shape::Piecewise(p) => p.inverse(r),
            Shape::Closed(c) => c.inverse(r),
        };
        periods * TAU + within
    }

    /// `∫_{θ0}^{θ1} w`.
    pub fn integrate(&self, theta0: f64, theta1: f64) -> Result<f64> {
        if theta0 > theta1 {
            return Err(WirtingerError::ReversedBounds {
                lower: theta0,
                upper: theta1,
            });
        }
        Ok(self.antiderivative(theta1) - self.antiderivative(theta0))
    }

    /// Pointwise `g(w(θ))`; `bounds` maps declared bounds when present.
    fn map_values<G>(
        &self,
        label: String,
        g: G,
        bounds: impl Fn(f64, f64) -> (f64, f64),
    ) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let declared = self.0.declared.map(|(lo, hi)| bounds(lo, hi));
        match &self.0.shape {
            Shape::Piecewise(p) => {
                let values: Vec<f64> = p.values.iter().map(|&v| g(v)).collect();
                let pw = Piecewise::new(&p.breakpoints, &values)?;
                Self::from_inner(label, Shape::Piecewise(pw), declared)
            }
            Shape::Closed(c) => {
                let f = c.f.clone();
                let closed = Closed::new(Arc::new(move |t| g(f(t))), c.jumps.clone(), c.panels);
                Self::from_inner(label, Shape::Closed(closed), declared)
            }
        }
    }

    /// Pointwise power `w^r`.
    pub fn power(&self, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(WirtingerError::InvalidParameter(format!("exponent {r}")));
        }
        if r == 1.0 {
            return Ok(self.clone());
        }
        if r == 0.0 {
            return Self::constant(1.0);
        }
        self.map_values(
            format!("pow:{r}:{}", self.label()),
            move |v| v.powf(r),
            move |lo, hi| {
                let (a, b) = (lo.powf(r), hi.powf(r));
                (a.min(b), a.max(b))
            },
        )
    }

    /// Pointwise reciprocal.
    pub fn recip(&self) -> Result<Self> {
        self.map_values(
            format!("inv:{}", self.label()),
            |v| 1.0 / v,
            |lo, hi| (1.0 / hi, 1.0 / lo),
        )
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.map_values(format!("pow:0.5:{}", self.label()), f64::sqrt, |lo, hi| {
            (lo.sqrt(), hi.sqrt())
        })
    }

    /// `s · w` for `s > 0`.
    pub fn scale(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(WirtingerError::InvalidParameter(format!(
                "scale factor must be positive, got {s}"
            )));
        }
        self.map_values(
            format!("scale:{s}:{}", self.label()),
            move |v| s * v,
            move |lo, hi| (s * lo, s * hi),
        )
    }

    fn combine<G>(&self, other: &Self, label: String, g: G) -> Result<Self>
    where
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        match (&self.0.shape, &other.0.shape) {
            (Shape::Piecewise(p), Shape::Piecewise(o)) => {
                let bps = canonical_breaks(p.breakpoints.iter().chain(&o.breakpoints).copied());
                let values: Vec<f64> = bps.iter().map(|&b| g(p.eval(b), o.eval(b))).collect();
                let pw = Piecewise::new(&bps, &values)?;
                Self::from_inner(label, Shape::Piecewise(pw), None)
            }
            _ => {
                let (lhs, rhs) = (self.clone(), other.clone());
                let jumps: Vec<f64> = self
                    .breakpoints()
                    .iter()
                    .chain(other.breakpoints())
                    .copied()
                    .collect();
                let closed = Closed::new(
                    Arc::new(move |t| g(lhs.eval(t), rhs.eval(t))),
                    jumps,
                    self.panels().max(other.panels()),
                );
                Self::from_inner(label, Shape::Closed(closed), None)
            }
        }
    }

    fn panels(&self) -> usize {
        match &self.0.shape {
            Shape::Piecewise(_) => DEFAULT_PANELS,
            Shape::Closed(c) => c.panels,
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(
            other,
            format!("({})*({})", self.label(), other.label()),
            |x, y| x * y,
        )
    }

    /// Pointwise quotient.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.combine(
            other,
            format!("({})/({})", self.label(), other.label()),
            |x, y| x / y,
        )
    }

    /// The translate `θ ↦ w(θ + φ)`.
    pub fn shift(&self, phi: f64) -> Result<Self> {
        let label = format!("shift:{phi}:{}", self.label());
        match &self.0.shape {
            Shape::Piecewise(p) => {
                let mut pairs: Vec<(f64, f64)> = p
                    .breakpoints
                    .iter()
                    .zip(&p.values)
                    .map(|(&b, &v)| (wrap_angle(b - phi), v))
                    .collect();
                pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
                pairs.dedup_by(|b, a| (b.0 - a.0).abs() <= MERGE_TOL);
                let (bps, vals): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
                let pw = Piecewise::new(&bps, &vals)?;
                Self::from_inner(label, Shape::Piecewise(pw), self.0.declared)
            }
            Shape::Closed(c) => {
                let f = c.f.clone();
                let jumps = c.jumps.iter().map(|&j| j - phi).collect();
                let closed =
                    Closed::new(Arc::new(move |t| f(wrap_angle(t + phi))), jumps, c.panels);
                Self::from_inner(label, Shape::Closed(closed), self.0.declared)
            }
        }
    }

    /// Divide by the infimum so that `inf = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let inf = self.ess_bounds().inf;
        if (inf - 1.0).abs() <= 1e-15 {
            return Ok(self.clone());
        }
        let w = self.scale(1.0 / inf)?;
        Ok(w.relabel(format!("norm:{}", self.label())))
    }
}

impl fmt::Debug for PeriodicWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicWeight")
            .field("label", &self.0.label)
            .field("kind", &self.kind())
            .field("bounds", &self.0.bounds)
            .finish()
    }
}
