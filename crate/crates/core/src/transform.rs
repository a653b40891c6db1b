//! Change of variables `τ(θ) = c⁻¹ ∫₀^θ √(a/b)` that turns the two-weight
//! problem into a single-weight one, and the explicit piecewise-linear
//! homeomorphisms of the extremal power-weight family.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use crate::error::{Result, WirtingerError};
use crate::function::PeriodicFn;
use crate::quad::{self, wrap_angle, Rule};
use crate::sharpness::extremal_weight_ps;
use crate::weights::PeriodicWeight;

/// Phase grid size for the functional-equation fit.
pub const PHASE_GRID: usize = 4096;
/// Sample count for fitting closed-form transported weights.
const FIT_SAMPLES: usize = 4096;

/// The normalizing constant `c_{p,q} = 2 / (1 + M^{-(p-q)/2})`.
pub fn c_pq(m: f64, p: f64, q: f64) -> f64 {
    2.0 / (1.0 + m.powf(-(p - q) / 2.0))
}

/// `θ ↦ τ` and its inverse for a pair of weights `(a, b)`.
#[derive(Clone, Debug)]
pub struct ChangeOfVariables {
    a: PeriodicWeight,
    b: PeriodicWeight,
    density: PeriodicWeight,
    c: f64,
}

/// Relative residuals of the three substitution identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubstitutionResiduals {
    /// `∫ a w²` against `c ∫ √(αβ) ξ²`.
    pub mass: f64,
    /// `∫ a w` against `c ∫ √(αβ) ξ`, scaled by `∫ a |w|`.
    pub constraint: f64,
    /// `∫ b w′²` against `c⁻¹ ∫ √(αβ) ξ′²`.
    pub stiffness: f64,
}

impl SubstitutionResiduals {
    pub fn max(&self) -> f64 {
        self.mass.max(self.constraint).max(self.stiffness)
    }
}

/// Best phase match of the transported geometric mean against `ā(· + φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalEqFit {
    pub phase: f64,
    /// `(2π (L − 1))⁻¹ ∫₀^{2π} |g(τ)/inf g − ā_L(τ + φ)| dτ`.
    pub residual: f64,
    /// `L = sup g / inf g`.
    pub level: f64,
}

impl ChangeOfVariables {
    pub fn new(a: &PeriodicWeight, b: &PeriodicWeight) -> Result<Self> {
        let density = a.div(b)?.sqrt()?;
        let c = density.mean();
        Ok(ChangeOfVariables {
            a: a.clone(),
            b: b.clone(),
            density,
            c,
        })
    }

    pub fn a(&self) -> &PeriodicWeight {
        &self.a
    }

    pub fn b(&self) -> &PeriodicWeight {
        &self.b
    }

    /// `√(a/b)`.
    pub fn density(&self) -> &PeriodicWeight {
        &self.density
    }

    /// Mean of `√(a/b)` over a period.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Whether both maps are exact piecewise-linear functions.
    pub fn is_exact(&self) -> bool {
        self.density.is_piecewise_constant()
    }

    pub fn forward(&self, theta: f64) -> f64 {
        self.density.antiderivative(theta) / self.c
    }

    pub fn inverse(&self, tau: f64) -> f64 {
        self.density.inverse_antiderivative(self.c * tau)
    }

    /// `dθ/dτ = c / √(a/b)(θ(τ))`.
    pub fn inverse_slope(&self, tau: f64) -> f64 {
        self.c / self.density.eval(self.inverse(tau))
    }

    fn theta_breaks(&self) -> Vec<f64> {
        self.a
            .breakpoints()
            .iter()
            .chain(self.b.breakpoints())
            .copied()
            .collect()
    }

    /// `τ ↦ √(a(θ(τ)) b(θ(τ)))`.
    pub fn transported_geometric_mean(&self) -> Result<PeriodicWeight> {
        let label = format!("transported({}, {})", self.a.label(), self.b.label());
        let product = self.a.mul(&self.b)?;
        if let (Some((bps, vals)), true) = (product.pieces(), self.is_exact()) {
            let taus: Vec<f64> = bps.iter().map(|&t| wrap_angle(self.forward(t))).collect();
            let roots: Vec<f64> = vals.iter().map(|v| v.sqrt()).collect();
            let mut pairs: Vec<(f64, f64)> = taus.into_iter().zip(roots).collect();
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            let (taus, roots): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            return Ok(PeriodicWeight::piecewise_constant(&taus, &roots)?.relabel(label));
        }
        let jumps: Vec<f64> = self
            .theta_breaks()
            .iter()
            .map(|&t| self.forward(t))
            .collect();
        let cov = Arc::new(self.clone());
        let weight = PeriodicWeight::closed_form_with_jumps(
            label,
            move |tau| {
                let theta = cov.inverse(tau);
                (cov.a.eval(theta) * cov.b.eval(theta)).sqrt()
            },
            jumps,
        )?;
        let bounds = product.ess_bounds();
        weight.with_declared_bounds(bounds.inf.sqrt(), bounds.sup.sqrt())
    }

    /// Compare the three substitution identities by quadrature in both
    /// variables. `ξ′` uses the chain rule with the exact slope of `θ(τ)`.
    pub fn substitution_check(
        &self,
        w: &PeriodicFn,
        panels: usize,
        rule: Rule,
    ) -> Result<SubstitutionResiduals> {
        let mut theta_breaks = self.theta_breaks();
        theta_breaks.extend_from_slice(w.kinks());
        let theta_nodes = quad::panel_nodes(&theta_breaks, panels);
        let tau_breaks: Vec<f64> = theta_breaks.iter().map(|&t| self.forward(t)).collect();
        let tau_nodes = quad::panel_nodes(&tau_breaks, panels);

        let (a, b) = (&self.a, &self.b);
        let lhs_mass =
            quad::integrate_nodes(|t| a.eval(t) * w.value(t).powi(2), &theta_nodes, rule);
        let lhs_constraint = quad::integrate_nodes(|t| a.eval(t) * w.value(t), &theta_nodes, rule);
        let abs_scale = quad::integrate_nodes(|t| a.eval(t) * w.value(t).abs(), &theta_nodes, rule);
        let lhs_stiff =
            quad::integrate_nodes(|t| b.eval(t) * w.derivative(t).powi(2), &theta_nodes, rule);

        // one pass over τ quadrature points, reusing θ(τ)
        let (mut rhs_mass, mut rhs_constraint, mut rhs_stiff) = (0.0, 0.0, 0.0);
        for win in tau_nodes.windows(2) {
            let pts: Vec<(f64, f64)> = match rule {
                Rule::Midpoint => vec![(0.5 * (win[0] + win[1]), win[1] - win[0])],
                Rule::GaussLegendre4 => quad::panel_points(win[0], win[1]).to_vec(),
            };
            for (tau, wt) in pts {
                let theta = self.inverse(tau);
                let g = (a.eval(theta) * b.eval(theta)).sqrt();
                let xi = w.value(theta);
                let dxi = w.derivative(theta) * self.c / self.density.eval(theta);
                rhs_mass += wt * g * xi * xi;
                rhs_constraint += wt * g * xi;
                rhs_stiff += wt * g * dxi * dxi;
            }
        }
        rhs_mass *= self.c;
        rhs_constraint *= self.c;
        rhs_stiff /= self.c;

        let rel = |lhs: f64, rhs: f64, what: &str| -> Result<f64> {
            if lhs == 0.0 {
                if rhs == 0.0 {
                    return Ok(0.0);
                }
                return Err(WirtingerError::Underflow(format!(
                    "{what}: left side is 0 but right side is {rhs:e}"
                )));
            }
            Ok((lhs - rhs).abs() / lhs.abs())
        };
        let mass = rel(lhs_mass, rhs_mass, "∫ a w²")?;
        let stiffness = rel(lhs_stiff, rhs_stiff, "∫ b w′²")?;
        if abs_scale == 0.0 {
            return Err(WirtingerError::Underflow("∫ a |w| vanishes".into()));
        }
        let constraint = (lhs_constraint - rhs_constraint).abs() / abs_scale;
        Ok(SubstitutionResiduals {
            mass,
            constraint,
            stiffness,
        })
    }

    /// Fit `g(τ)/inf g ≈ ā_L(τ + φ)` over `φ`, `g` the transported
    /// geometric mean. A phase grid over one period of `ā` is refined by
    /// golden-section search; step weights also try every phase that aligns
    /// a jump of `g` with a jump of `ā`.
    pub fn functional_eq_residual(&self) -> Result<FunctionalEqFit> {
        let g = self.transported_geometric_mean()?.normalized()?;
        let level = g.ess_bounds().sup;
        if level - 1.0 <= 1e-12 {
            return Ok(FunctionalEqFit {
                phase: 0.0,
                residual: 0.0,
                level: 1.0,
            });
        }
        let bar = extremal_weight_ps(level)?;
        let scale = 1.0 / (TAU * (level - 1.0));

        let objective: Box<dyn Fn(f64) -> f64> = match g.pieces() {
            Some(_) => {
                let (g, bar) = (g.clone(), bar.clone());
                Box::new(move |phi| scale * step_l1_shifted(&g, &bar, phi))
            }
            None => {
                let h = TAU / FIT_SAMPLES as f64;
                let samples: Vec<(f64, f64)> = (0..FIT_SAMPLES)
                    .map(|k| {
                        let tau = (k as f64 + 0.5) * h;
                        (tau, g.eval(tau))
                    })
                    .collect();
                let bar = bar.clone();
                Box::new(move |phi| {
                    scale
                        * h
                        * samples
                            .iter()
                            .map(|&(t, v)| (v - bar.eval(t + phi)).abs())
                            .sum::<f64>()
                })
            }
        };

        let step = PI / PHASE_GRID as f64;
        let mut best = (0.0, f64::INFINITY);
        for k in 0..PHASE_GRID {
            let phi = k as f64 * step;
            let r = objective(phi);
            if r < best.1 {
                best = (phi, r);
            }
        }
        let refined = golden_section(&*objective, best.0 - step, best.0 + step, 1e-13);
        let r = objective(refined);
        if r < best.1 {
            best = (refined, r);
        }
        if let Some((g_breaks, _)) = g.pieces() {
            for &beta in g_breaks {
                for &alpha in bar.breakpoints() {
                    let phi = wrap_angle(alpha - beta);
                    let r = objective(phi);
                    if r < best.1 {
                        best = (phi, r);
                    }
                }
            }
        }
        Ok(FunctionalEqFit {
            phase: wrap_angle(best.0),
            residual: best.1,
            level,
        })
    }
}

/// `build_cov`: the change of variables for `(a, b)`.
pub fn build_cov(a: &PeriodicWeight, b: &PeriodicWeight) -> Result<ChangeOfVariables> {
    ChangeOfVariables::new(a, b)
}

/// `∫₀^{2π} |f(τ) − g(τ + φ)|` for step weights, computed exactly.
fn step_l1_shifted(f: &PeriodicWeight, g: &PeriodicWeight, phi: f64) -> f64 {
    let (fb, _) = f.pieces().expect("step weight");
    let (gb, _) = g.pieces().expect("step weight");
    let mut cuts: Vec<f64> = fb
        .iter()
        .copied()
        .chain(gb.iter().map(|&b| wrap_angle(b - phi)))
        .collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(TAU);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (f.eval(mid) - g.eval(mid + phi)).abs() * (w[1] - w[0])
        })
        .sum()
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Continuous, strictly increasing piecewise-linear map of the line with
/// `h(x + 2π) = h(x) + 2π`, described on one period.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearMap {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PiecewiseLinearMap {
    /// `breakpoints[0]` must be 0 and the map must advance by exactly 2π
    /// over one period.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let n = breakpoints.len();
        if n == 0 || values.len() != n || slopes.len() != n {
            return Err(WirtingerError::InvalidParameter(
                "mismatched map description".into(),
            ));
        }
        if breakpoints[0] != 0.0
            || breakpoints.windows(2).any(|w| w[1] <= w[0])
            || breakpoints[n - 1] >= TAU
        {
            return Err(WirtingerError::InvalidParameter(
                "bad map breakpoints".into(),
            ));
        }
        if slopes.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(WirtingerError::InvalidParameter(
                "slopes must be positive".into(),
            ));
        }
        for i in 0..n {
            let end = breakpoints.get(i + 1).copied().unwrap_or(TAU);
            let next = values.get(i + 1).copied().unwrap_or(values[0] + TAU);
            let reached = values[i] + slopes[i] * (end - breakpoints[i]);
            if (reached - next).abs() > 1e-12 * TAU {
                return Err(WirtingerError::InvalidParameter(format!(
                    "map is discontinuous at the end of piece {i}: {reached} vs {next}"
                )));
            }
        }
        Ok(PiecewiseLinearMap {
            breakpoints,
            values,
            slopes,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn eval(&self, x: f64) -> f64 {
        let r = wrap_angle(x);
        let periods = ((x - r) / TAU).round();
        let i = self.breakpoints.partition_point(|&b| b <= r).max(1) - 1;
        self.values[i] + self.slopes[i] * (r - self.breakpoints[i]) + TAU * periods
    }

    /// Slope of the piece containing `x`.
    pub fn slope(&self, x: f64) -> f64 {
        let r = wrap_angle(x);
        self.slopes[self.breakpoints.partition_point(|&b| b <= r).max(1) - 1]
    }

    /// Generic inverse, for maps that fix the origin.
    pub fn inverse(&self) -> Result<Self> {
        if self.values[0] != 0.0 {
            return Err(WirtingerError::InvalidParameter(
                "inverse needs h(0) = 0".into(),
            ));
        }
        PiecewiseLinearMap::new(
            self.values.clone(),
            self.breakpoints.clone(),
            self.slopes.iter().map(|s| 1.0 / s).collect(),
        )
    }
}

fn check_pq(m: f64, p: f64, q: f64) -> Result<()> {
    if !(p + q > 0.0) {
        return Err(WirtingerError::InvalidParameter(format!(
            "need p + q > 0, got p = {p}, q = {q}"
        )));
    }
    if !(m >= 1.0) || !m.is_finite() {
        return Err(WirtingerError::InvalidParameter(format!(
            "need M ≥ 1, got {m}"
        )));
    }
    Ok(())
}

/// `h_{p,q}`: slopes `c·{1, s, 1, s}` on the quarter periods, `s = M^{-(p-q)/2}`.
pub fn h_pq(m: f64, p: f64, q: f64) -> Result<PiecewiseLinearMap> {
    check_pq(m, p, q)?;
    let s = m.powf(-(p - q) / 2.0);
    let c = c_pq(m, p, q);
    PiecewiseLinearMap::new(
        vec![0.0, FRAC_PI_2, PI, 1.5 * PI],
        vec![
            0.0,
            c * FRAC_PI_2,
            c * FRAC_PI_2 * (1.0 + s),
            c * FRAC_PI_2 * (2.0 + s),
        ],
        vec![c, c * s, c, c * s],
    )
}

/// `h_{p,q}⁻¹`, built from its own case table with breakpoints
/// `{0, cπ/2, π, π + cπ/2}`.
pub fn h_pq_inv(m: f64, p: f64, q: f64) -> Result<PiecewiseLinearMap> {
    check_pq(m, p, q)?;
    let c = c_pq(m, p, q);
    let steep = m.powf((p - q) / 2.0) / c;
    PiecewiseLinearMap::new(
        vec![0.0, c * FRAC_PI_2, PI, PI + c * FRAC_PI_2],
        vec![0.0, FRAC_PI_2, PI, 1.5 * PI],
        vec![1.0 / c, steep, 1.0 / c, steep],
    )
}
