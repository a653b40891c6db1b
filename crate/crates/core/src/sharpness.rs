//! Closed-form upper bounds for `C(a, b)`, the weights and functions that
//! attain them, and numerical equality checks.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::error::{Result, WirtingerError};
use crate::function::PeriodicFn;
use crate::quad::wrap_angle;
use crate::spectral;
use crate::transform::{build_cov, c_pq};
use crate::weights::PeriodicWeight;

/// Largest relative gap between bound and computed constant still called sharp.
pub const SHARPNESS_TOL: f64 = 5e-3;
/// Largest functional-equation residual still called sharp.
pub const FUNCTIONAL_EQ_TOL: f64 = 1e-6;

/// `(4/π) arctan x`.
pub fn arctan_factor(x: f64) -> f64 {
    4.0 / PI * x.atan()
}

/// Bound for arbitrary weights:
/// `( mean √(a/b) / ((4/π) arctan((inf ab / sup ab)^{1/4})) )²`.
pub fn bound_general(a: &PeriodicWeight, b: &PeriodicWeight) -> Result<f64> {
    let mean = a.div(b)?.sqrt()?.mean();
    let product = a.mul(b)?.ess_bounds();
    let denom = arctan_factor((product.inf / product.sup).powf(0.25));
    Ok((mean / denom).powi(2))
}

/// `a = γ^p`, `b = γ^q` with `γ` rescaled to `inf γ = 1`.
#[derive(Clone, Debug)]
pub struct PowerWeightPair {
    gamma: PeriodicWeight,
    p: f64,
    q: f64,
    m: f64,
}

impl PowerWeightPair {
    pub fn new(gamma: &PeriodicWeight, p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(WirtingerError::InvalidParameter(format!(
                "exponents p = {p}, q = {q}"
            )));
        }
        let gamma = gamma.normalized()?;
        let m = gamma.ess_bounds().sup;
        Ok(PowerWeightPair { gamma, p, q, m })
    }

    pub fn gamma(&self) -> &PeriodicWeight {
        &self.gamma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `sup γ` after normalization.
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> Result<PeriodicWeight> {
        self.gamma.power(self.p)
    }

    pub fn b(&self) -> Result<PeriodicWeight> {
        self.gamma.power(self.q)
    }

    /// Same exponents with `γ(· + φ)`.
    pub fn shifted(&self, phi: f64) -> Result<Self> {
        PowerWeightPair::new(&self.gamma.shift(phi)?, self.p, self.q)
    }
}

/// `( mean γ^{(p−q)/2} / ((4/π) arctan M^{−(p+q)/4}) )²`, requires `p + q ≥ 0`.
pub fn bound_power(pair: &PowerWeightPair) -> Result<f64> {
    let (p, q) = (pair.p, pair.q);
    if p + q < 0.0 {
        return Err(WirtingerError::InvalidParameter(format!(
            "power bound needs p + q ≥ 0, got {}",
            p + q
        )));
    }
    let mean = pair.gamma.power((p - q) / 2.0)?.mean();
    let denom = arctan_factor(pair.m.powf(-(p + q) / 4.0));
    Ok((mean / denom).powi(2))
}

/// The two-level weight `ā`: 1 on `[0, π/2) ∪ [π, 3π/2)`, `L` elsewhere.
pub fn extremal_weight_ps(l: f64) -> Result<PeriodicWeight> {
    if !(l >= 1.0) || !l.is_finite() {
        return Err(WirtingerError::InvalidParameter(format!(
            "need L ≥ 1, got {l}"
        )));
    }
    Ok(
        PeriodicWeight::piecewise_constant(&[0.0, FRAC_PI_2, PI, 1.5 * PI], &[1.0, l, 1.0, l])?
            .relabel(format!("bar-a:{l}")),
    )
}

fn check_pq(m: f64, p: f64, q: f64) -> Result<()> {
    if !(m > 1.0) || !m.is_finite() {
        return Err(WirtingerError::InvalidParameter(format!(
            "need M > 1, got {m}"
        )));
    }
    if !(p + q > 0.0) {
        return Err(WirtingerError::InvalidParameter(format!(
            "need p + q > 0, got {}",
            p + q
        )));
    }
    Ok(())
}

/// `γ̄_{p,q}`: 1 on `[0, cπ/2) ∪ [π, π + cπ/2)`, `M` elsewhere, `c = c_{p,q}`.
pub fn extremal_weight_pq(m: f64, p: f64, q: f64) -> Result<PeriodicWeight> {
    check_pq(m, p, q)?;
    let c = c_pq(m, p, q);
    Ok(PeriodicWeight::piecewise_constant(
        &[0.0, c * FRAC_PI_2, PI, PI + c * FRAC_PI_2],
        &[1.0, m, 1.0, m],
    )?
    .relabel(format!("bar-gamma:{m},{p},{q}")))
}

/// Which exponent to use in `μ = ((4/π) arctan M^{−k})²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MuMode {
    /// `k = p + q`, as printed in the statement of the theorem.
    PaperLiteral,
    /// `k = (p + q)/4`, the value forced by continuity of `w̄_{p,q}`.
    #[default]
    ContinuityCorrected,
}

pub fn mu(m: f64, p: f64, q: f64, mode: MuMode) -> f64 {
    let exponent = match mode {
        MuMode::PaperLiteral => -(p + q),
        MuMode::ContinuityCorrected => -(p + q) / 4.0,
    };
    arctan_factor(m.powf(exponent)).powi(2)
}

/// `λ = ((4/π) arctan L^{−1/2})²`.
pub fn lambda_ps(l: f64) -> f64 {
    arctan_factor(l.powf(-0.5)).powi(2)
}

/// The four-piece sine/cosine extremal. Piece `i` lives on
/// `[breaks[i], breaks[i+1])` and is written in the rescaled variable
/// `τ(θ)` with slopes `1/c` (low pieces) and `e/c` (high pieces).
#[derive(Clone, Copy, Debug, PartialEq)]
struct QuarterWave {
    c: f64,
    e: f64,
    amp: f64,
    freq: f64,
}

impl QuarterWave {
    fn breaks(&self) -> [f64; 4] {
        [0.0, self.c * FRAC_PI_2, PI, PI + self.c * FRAC_PI_2]
    }

    fn piece(&self, r: f64) -> usize {
        let b = self.breaks();
        b.partition_point(|&x| x <= r).max(1) - 1
    }

    /// `(τ, dτ/dθ)` on piece `i` at `θ` (not reduced).
    fn tau(&self, i: usize, theta: f64) -> (f64, f64) {
        let (c, e) = (self.c, self.e);
        match i {
            0 => (theta / c, 1.0 / c),
            1 => (FRAC_PI_2 + e / c * (theta - c * FRAC_PI_2), e / c),
            2 => (PI + (theta - PI) / c, 1.0 / c),
            _ => (1.5 * PI + e / c * (theta - PI - c * FRAC_PI_2), e / c),
        }
    }

    /// Value and derivative of the formula for piece `i`, evaluated at `θ`.
    fn branch(&self, i: usize, theta: f64) -> (f64, f64) {
        let (tau, slope) = self.tau(i, theta);
        let s = self.freq;
        match i {
            0 => {
                let x = s * (tau - FRAC_PI_4);
                (x.sin(), s * slope * x.cos())
            }
            1 => {
                let x = s * (tau - 3.0 * FRAC_PI_4);
                (self.amp * x.cos(), -self.amp * s * slope * x.sin())
            }
            2 => {
                let x = s * (tau - 5.0 * FRAC_PI_4);
                (-x.sin(), -s * slope * x.cos())
            }
            _ => {
                let x = s * (tau - 7.0 * FRAC_PI_4);
                (-self.amp * x.cos(), self.amp * s * slope * x.sin())
            }
        }
    }

    fn eval(&self, theta: f64) -> (f64, f64) {
        let r = wrap_angle(theta);
        self.branch(self.piece(r), r)
    }

    fn to_fn(self, label: String) -> PeriodicFn {
        PeriodicFn::new(label, move |t| self.eval(t).0)
            .with_derivative(move |t| self.eval(t).1)
            .with_kinks(self.breaks().to_vec())
    }

    /// One-sided limits `(left, right)` at breakpoint `k`.
    fn limits(&self, k: usize) -> ((f64, f64), (f64, f64)) {
        let b = self.breaks();
        let left_piece = (k + 3) % 4;
        let at = if k == 0 { TAU } else { b[k] };
        (self.branch(left_piece, at), self.branch(k, b[k]))
    }
}

/// An extremal weight with its extremal function and constants.
#[derive(Clone, Debug)]
pub struct ExtremalProfile {
    pub weight: PeriodicWeight,
    pub extremal_fn: PeriodicFn,
    /// `c_{p,q}` for the power family; absent for `ā`.
    pub c_pq: Option<f64>,
    /// `μ` for the power family.
    pub mu: Option<f64>,
    /// `λ` for `ā`.
    pub lambda: Option<f64>,
    pub mu_mode: Option<MuMode>,
    pub p: f64,
    pub q: f64,
    pub phase: f64,
    wave: QuarterWave,
}

impl ExtremalProfile {
    /// Constant attained by the profile: `1/λ` or `c²/μ`.
    pub fn constant(&self) -> f64 {
        match (self.lambda, self.mu, self.c_pq) {
            (Some(l), _, _) => 1.0 / l,
            (None, Some(mu), Some(c)) => c * c / mu,
            _ => unreachable!("profile without eigen parameter"),
        }
    }

    /// `a = weight^p`.
    pub fn a(&self) -> Result<PeriodicWeight> {
        self.weight.power(self.p)
    }

    /// `b = weight^q`.
    pub fn b(&self) -> Result<PeriodicWeight> {
        self.weight.power(self.q)
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        self.wave.breaks()
    }

    /// `|w(b⁻) − w(b⁺)|` at the four breakpoints.
    pub fn continuity_residuals(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let (left, right) = self.wave.limits(k);
            *slot = (left.0 - right.0).abs();
        }
        out
    }

    /// `|b w′(b⁻) − b w′(b⁺)|` at the four breakpoints, `b = weight^q`.
    pub fn transmission_residuals(&self) -> [f64; 4] {
        let flux = self.b().expect("power of a valid weight");
        let bps = self.wave.breaks();
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let (left, right) = self.wave.limits(k);
            let at = bps[k];
            let b_left = flux.eval(if k == 0 { TAU } else { at } - 1e-9);
            let b_right = flux.eval(at);
            *slot = (b_left * left.1 - b_right * right.1).abs();
        }
        out
    }
}

/// `ā` together with `w̄` and `λ`.
pub fn extremal_fn_ps(l: f64) -> Result<ExtremalProfile> {
    let weight = extremal_weight_ps(l)?;
    let lambda = lambda_ps(l);
    let wave = QuarterWave {
        c: 1.0,
        e: 1.0,
        amp: l.powf(-0.5),
        freq: lambda.sqrt(),
    };
    Ok(ExtremalProfile {
        extremal_fn: wave.to_fn(format!("bar-w:{l}")),
        weight,
        c_pq: None,
        mu: None,
        lambda: Some(lambda),
        mu_mode: None,
        p: 1.0,
        q: 1.0,
        phase: 0.0,
        wave,
    })
}

/// `γ̄_{p,q}` together with `w̄_{p,q}`, `c_{p,q}` and `μ`.
pub fn extremal_fn_pq(m: f64, p: f64, q: f64, mode: MuMode) -> Result<ExtremalProfile> {
    let weight = extremal_weight_pq(m, p, q)?;
    let c = c_pq(m, p, q);
    let mu = mu(m, p, q, mode);
    let wave = QuarterWave {
        c,
        e: m.powf((p - q) / 2.0),
        amp: m.powf(-(p + q) / 4.0),
        freq: mu.sqrt(),
    };
    Ok(ExtremalProfile {
        extremal_fn: wave.to_fn(format!("bar-w:{m},{p},{q}")),
        weight,
        c_pq: Some(c),
        mu: Some(mu),
        lambda: None,
        mu_mode: Some(mode),
        p,
        q,
        phase: 0.0,
        wave,
    })
}

/// `C(a, a⁻¹) = (mean a)²` and its extremizer
/// `amplitude · cos(2π A(θ)/A(2π) + phase)`, `A` the antiderivative of `a`.
pub fn closed_form_pq0(
    a: &PeriodicWeight,
    amplitude: f64,
    phase: f64,
) -> Result<(f64, PeriodicFn)> {
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(WirtingerError::InvalidParameter(format!(
            "amplitude must be non-zero, got {amplitude}"
        )));
    }
    let constant = a.mean().powi(2);
    let total = a.total();
    let (w, dw) = (a.clone(), a.clone());
    let f = PeriodicFn::new(format!("cos-extremizer:{}", a.label()), move |t| {
        amplitude * (TAU * w.antiderivative(t) / total + phase).cos()
    })
    .with_derivative(move |t| {
        -amplitude * (TAU * dw.antiderivative(t) / total + phase).sin() * TAU * dw.eval(t) / total
    })
    .with_kinks(a.breakpoints().to_vec());
    Ok((constant, f))
}

/// Closed-form bound against the computed constant.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub bound: f64,
    /// Richardson-extrapolated constant.
    pub computed: f64,
    /// `(bound − computed) / bound`.
    pub relative_gap: f64,
    pub sharp: bool,
    pub n: usize,
    pub estimated_order: Option<f64>,
    pub finest_constant: f64,
}

fn refinement_levels(n: usize) -> Result<[usize; 3]> {
    if n / 4 < spectral::MIN_NODES {
        return Err(WirtingerError::MeshTooSmall(n / 4));
    }
    Ok([n / 4, n / 2, n])
}

fn report(bound: f64, a: &PeriodicWeight, b: &PeriodicWeight, n: usize) -> Result<BoundReport> {
    let study = spectral::converge(a, b, &refinement_levels(n)?)?;
    let computed = study.result.constant;
    let relative_gap = (bound - computed) / bound;
    Ok(BoundReport {
        bound,
        computed,
        relative_gap,
        sharp: relative_gap.abs() <= SHARPNESS_TOL,
        n,
        estimated_order: study.result.estimated_order,
        finest_constant: study.finest_constant,
    })
}

/// Solve at `n/4, n/2, n`, extrapolate, and compare with the power bound.
pub fn verify_sharpness(pair: &PowerWeightPair, n: usize) -> Result<BoundReport> {
    let bound = bound_power(pair)?;
    report(bound, &pair.a()?, &pair.b()?, n)
}

/// Functional-equation test for equality in the general bound, cross-checked
/// against an eigensolve.
#[derive(Clone, Debug, PartialEq)]
pub struct Characterization {
    pub is_sharp: bool,
    pub best_phase: f64,
    pub residual: f64,
    /// `L` with `√(ab)/inf √(ab)` in the class of level `L`.
    pub level: f64,
    /// Spectral verdict against `bound_general`.
    pub spectral: BoundReport,
    /// Both verdicts agree.
    pub consistent: bool,
}

pub fn sharpness_characterization(
    a: &PeriodicWeight,
    b: &PeriodicWeight,
    n: usize,
) -> Result<Characterization> {
    let fit = build_cov(a, b)?.functional_eq_residual()?;
    let is_sharp = fit.residual <= FUNCTIONAL_EQ_TOL;
    let spectral = report(bound_general(a, b)?, a, b, n)?;
    Ok(Characterization {
        is_sharp,
        best_phase: fit.phase,
        residual: fit.residual,
        level: fit.level,
        consistent: spectral.sharp == is_sharp,
        spectral,
    })
}
