//! First constrained eigenvalue of `−(b w′)′ = λ a w` on the circle.
//!
//! Piecewise-linear elements on a periodic mesh that contains every jump of
//! the weights. The constant mode is removed in the mass inner product and
//! the lowest remaining eigenpair is found by shift-inverted block subspace
//! iteration with Rayleigh–Ritz, using an O(n) cyclic tridiagonal solve.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, WirtingerError};
use crate::function::PeriodicFn;
use crate::quad::{self, canonical_breaks, Rule};
use crate::weights::PeriodicWeight;

pub const DEFAULT_N: usize = 2048;
pub const MIN_NODES: usize = 8;
/// Panels per period for quadrature of closed-form trial functions.
pub const QUOTIENT_PANELS: usize = 4096;

const BLOCK: usize = 8;
const MAX_ITERATIONS: usize = 2000;
const EIG_TOL: f64 = 1e-14;

/// Periodic mesh; the last element runs from the last node to `2π`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(WirtingerError::MeshTooSmall(nodes.len()));
        }
        if nodes[0] != 0.0
            || nodes.windows(2).any(|w| w[1] <= w[0])
            || *nodes.last().unwrap() >= TAU
        {
            return Err(WirtingerError::InvalidParameter(
                "mesh nodes must increase from 0 and stay below 2π".into(),
            ));
        }
        Ok(Mesh { nodes })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Endpoints of element `e`, which joins node `e` to node `e + 1 mod n`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        let x0 = self.nodes[e];
        let x1 = self.nodes.get(e + 1).copied().unwrap_or(TAU);
        (x0, x1)
    }
}

/// Uniform `n`-node spacing refined so that every jump of `a` or `b` is a
/// node: each gap between consecutive jumps is split into
/// `⌈n · length / 2π⌉` equal elements.
pub fn build_mesh(a: &PeriodicWeight, b: &PeriodicWeight, n: usize) -> Result<Mesh> {
    if n < MIN_NODES {
        return Err(WirtingerError::MeshTooSmall(n));
    }
    let mut breaks = canonical_breaks(
        a.breakpoints()
            .iter()
            .chain(b.breakpoints())
            .copied()
            .chain([0.0]),
    );
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-10);
    let mut nodes = Vec::with_capacity(n + breaks.len());
    for (i, &start) in breaks.iter().enumerate() {
        let end = breaks.get(i + 1).copied().unwrap_or(TAU);
        let len = end - start;
        let pieces = ((n as f64 * len / TAU) - 1e-9).ceil().max(1.0) as usize;
        let h = len / pieces as f64;
        nodes.extend((0..pieces).map(|j| start + j as f64 * h));
    }
    Mesh::from_nodes(nodes)
}

/// Symmetric cyclic tridiagonal matrix. `off[i]` couples nodes `i` and
/// `i + 1 mod n`. Row sums are accumulated separately during assembly so
/// that quadratic forms can be evaluated in difference form.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    row_sum: Vec<f64>,
}

impl CyclicTridiagonal {
    fn zeros(n: usize) -> Self {
        CyclicTridiagonal {
            diag: vec![0.0; n],
            off: vec![0.0; n],
            row_sum: vec![0.0; n],
        }
    }

    /// Add the element matrix `[[p, r], [r, s]]` for element `e`.
    fn add_element(&mut self, e: usize, p: f64, r: f64, s: f64) {
        let n = self.diag.len();
        let j = (e + 1) % n;
        self.diag[e] += p;
        self.diag[j] += s;
        self.off[e] += r;
        self.row_sum[e] += p + r;
        self.row_sum[j] += r + s;
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sum
    }

    /// Sum of all entries, `1ᵀ A 1`.
    pub fn total(&self) -> f64 {
        self.row_sum.iter().sum()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                self.diag[i] * x[i] + self.off[i] * x[next] + self.off[prev] * x[prev]
            })
            .collect()
    }

    /// `xᵀ A y` in difference form.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            acc += self.row_sum[i] * x[i] * y[i] - self.off[i] * (x[i] - x[j]) * (y[i] - y[j]);
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let j = (i + 1) % n;
            m[(i, i)] += self.diag[i];
            m[(i, j)] += self.off[i];
            m[(j, i)] += self.off[i];
        }
        m
    }

    /// `s·self + t·other`.
    pub fn combine(&self, s: f64, other: &Self, t: f64) -> Self {
        let zip = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| s * u + t * v).collect();
        CyclicTridiagonal {
            diag: zip(&self.diag, &other.diag),
            off: zip(&self.off, &other.off),
            row_sum: zip(&self.row_sum, &other.row_sum),
        }
    }
}

/// LDLᵀ of the tridiagonal part plus a Sherman–Morrison correction for the
/// corner coupling.
struct CyclicSolver {
    l: Vec<f64>,
    d: Vec<f64>,
    v_last: f64,
    z: Vec<f64>,
    denom: f64,
}

impl CyclicSolver {
    fn new(a: &CyclicTridiagonal) -> Result<Self> {
        let n = a.n();
        let gamma = -a.diag[0];
        let corner = a.off[n - 1];
        let mut diag = a.diag.clone();
        diag[0] -= gamma;
        diag[n - 1] -= corner * corner / gamma;
        let mut l = vec![0.0; n];
        let mut d = vec![0.0; n];
        d[0] = diag[0];
        for i in 1..n {
            l[i] = a.off[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i] * a.off[i - 1];
            if !(d[i] > 0.0) {
                return Err(WirtingerError::Eigensolve(format!(
                    "shifted operator is not positive definite (pivot {i}: {:e})",
                    d[i]
                )));
            }
        }
        let mut solver = CyclicSolver {
            l,
            d,
            v_last: corner / gamma,
            z: Vec::new(),
            denom: 0.0,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = corner;
        let z = solver.solve_tridiagonal(&u);
        solver.denom = 1.0 + z[0] + solver.v_last * z[n - 1];
        solver.z = z;
        Ok(solver)
    }

    fn solve_tridiagonal(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.l[i] * x[i - 1];
        }
        x.iter_mut().zip(&self.d).for_each(|(xi, di)| *xi /= di);
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i + 1] * x[i + 1];
        }
        x
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = self.solve_tridiagonal(rhs);
        let factor = (y[0] + self.v_last * y[n - 1]) / self.denom;
        for (yi, zi) in y.iter_mut().zip(&self.z) {
            *yi -= factor * zi;
        }
        y
    }
}

/// Stiffness `∫ b φᵢ′φⱼ′` and mass `∫ a φᵢφⱼ` for hat functions.
pub fn assemble(
    a: &PeriodicWeight,
    b: &PeriodicWeight,
    mesh: &Mesh,
) -> (CyclicTridiagonal, CyclicTridiagonal) {
    let n = mesh.n();
    let mut stiffness = CyclicTridiagonal::zeros(n);
    let mut mass = CyclicTridiagonal::zeros(n);
    let exact = a.is_piecewise_constant() && b.is_piecewise_constant();
    for e in 0..n {
        let (x0, x1) = mesh.element(e);
        let h = x1 - x0;
        let (b_int, m00, m01, m11) = if exact {
            let mid = 0.5 * (x0 + x1);
            let av = a.eval(mid);
            (b.eval(mid) * h, av * h / 3.0, av * h / 6.0, av * h / 3.0)
        } else {
            let mut acc = (0.0, 0.0, 0.0, 0.0);
            for (x, w) in quad::panel_points(x0, x1) {
                let s = (x - x0) / h;
                let (phi0, phi1) = (1.0 - s, s);
                let av = a.eval(x);
                acc.0 += w * b.eval(x);
                acc.1 += w * av * phi0 * phi0;
                acc.2 += w * av * phi0 * phi1;
                acc.3 += w * av * phi1 * phi1;
            }
            acc
        };
        let k = b_int / (h * h);
        stiffness.add_element(e, k, -k, k);
        mass.add_element(e, m00, m01, m11);
    }
    (stiffness, mass)
}

/// Outcome of a discrete solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    /// Estimate of the best constant, `1 / lambda1`.
    pub constant: f64,
    pub lambda1: f64,
    /// Nodal values, scaled so that `∫ a w² = ∫ a` and positive at the
    /// first node of largest magnitude.
    pub eigenfunction: Vec<f64>,
    pub nodes: Vec<f64>,
    pub n: usize,
    pub estimated_order: Option<f64>,
    /// `|∫ a w| / ∫ a |w|` of the returned eigenfunction.
    pub constraint_residual: f64,
    pub iterations: usize,
}

fn deflate(x: &mut [f64], mass_ones: &[f64], ones_norm: f64) {
    let coef = x.iter().zip(mass_ones).map(|(u, v)| u * v).sum::<f64>() / ones_norm;
    for xi in x.iter_mut() {
        *xi -= coef;
    }
}

/// Lowest eigenpair of `K x = λ M x` on `{x : 1ᵀ M x = 0}`. `shift` must
/// be positive; the iteration runs on `(K + shift·M)⁻¹ M`.
pub fn lowest_constrained_eigenpair(
    stiffness: &CyclicTridiagonal,
    mass: &CyclicTridiagonal,
    nodes: &[f64],
    shift: f64,
) -> Result<(f64, Vec<f64>, usize)> {
    let n = stiffness.n();
    let block = BLOCK.min(n - 2);
    let solver = CyclicSolver::new(&stiffness.combine(1.0, mass, shift))?;
    let mass_ones = mass.row_sums().to_vec();
    let ones_norm: f64 = mass_ones.iter().sum();

    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|j| {
            let k = (j / 2 + 1) as f64;
            let mut v: Vec<f64> = nodes
                .iter()
                .map(|&t| {
                    if j % 2 == 0 {
                        (k * t).cos()
                    } else {
                        (k * t).sin()
                    }
                })
                .collect();
            deflate(&mut v, &mass_ones, ones_norm);
            v
        })
        .collect();

    let mut previous = f64::NAN;
    let mut settled = 0;
    for iteration in 1..=MAX_ITERATIONS {
        let mut images: Vec<Vec<f64>> = basis
            .iter()
            .map(|x| {
                let mut y = solver.solve(&mass.apply(x));
                deflate(&mut y, &mass_ones, ones_norm);
                y
            })
            .collect();
        let (values, coefficients) = rayleigh_ritz(stiffness, mass, &images)?;
        basis = (0..block)
            .map(|col| {
                let mut v = vec![0.0; n];
                for (r, img) in images.iter().enumerate() {
                    let c = coefficients[(r, col)];
                    for (vi, yi) in v.iter_mut().zip(img) {
                        *vi += c * yi;
                    }
                }
                v
            })
            .collect();
        images.clear();

        let lambda = values[0];
        if (lambda - previous).abs() <= EIG_TOL * lambda.abs() {
            settled += 1;
            if settled >= 2 {
                return Ok((lambda, basis.swap_remove(0), iteration));
            }
        } else {
            settled = 0;
        }
        previous = lambda;
    }
    Err(WirtingerError::Eigensolve(format!(
        "no convergence after {MAX_ITERATIONS} iterations"
    )))
}

/// Ritz values (ascending) and M-orthonormal coefficient vectors.
fn rayleigh_ritz(
    stiffness: &CyclicTridiagonal,
    mass: &CyclicTridiagonal,
    vectors: &[Vec<f64>],
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = vectors.len();
    let mut kr = DMatrix::zeros(k, k);
    let mut mr = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let kij = stiffness.bilinear(&vectors[i], &vectors[j]);
            let mij = mass.bilinear(&vectors[i], &vectors[j]);
            kr[(i, j)] = kij;
            kr[(j, i)] = kij;
            mr[(i, j)] = mij;
            mr[(j, i)] = mij;
        }
    }
    let chol = mr.cholesky().ok_or_else(|| {
        WirtingerError::Eigensolve("Ritz mass matrix is not positive definite".into())
    })?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| WirtingerError::Eigensolve("singular Ritz factor".into()))?;
    let reduced = &l_inv * kr * l_inv.transpose();
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let coef_all = l_inv.transpose() * &eig.eigenvectors;
    let mut coefficients = DMatrix::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        coefficients.set_column(dst, &coef_all.column(src));
    }
    Ok((
        order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        coefficients,
    ))
}

/// Solve on an explicit mesh.
pub fn solve_on_mesh(
    a: &PeriodicWeight,
    b: &PeriodicWeight,
    mesh: &Mesh,
) -> Result<SpectralResult> {
    let (stiffness, mass) = assemble(a, b, mesh);
    // λ₁ ≥ inf b / sup a, so this shift keeps K + σM definite.
    let shift = b.ess_bounds().inf / a.ess_bounds().sup;
    let (lambda1, mut w, iterations) =
        lowest_constrained_eigenpair(&stiffness, &mass, mesh.nodes(), shift)?;
    if !(lambda1 > 0.0) {
        return Err(WirtingerError::NonPositiveEigenvalue(lambda1));
    }
    let norm = mass.bilinear(&w, &w).sqrt();
    let target = a.total().sqrt();
    let peak = w
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, v)| {
            if v.abs() > acc.1 {
                (i, v.abs())
            } else {
                acc
            }
        })
        .0;
    let sign = if w[peak] < 0.0 { -1.0 } else { 1.0 };
    for wi in w.iter_mut() {
        *wi *= sign * target / norm;
    }
    let constraint_residual = nodal_constraint_residual(&mass, &w);
    Ok(SpectralResult {
        constant: 1.0 / lambda1,
        lambda1,
        eigenfunction: w,
        nodes: mesh.nodes().to_vec(),
        n: mesh.n(),
        estimated_order: None,
        constraint_residual,
        iterations,
    })
}

fn nodal_constraint_residual(mass: &CyclicTridiagonal, w: &[f64]) -> f64 {
    let signed: f64 = w.iter().zip(mass.row_sums()).map(|(x, m)| x * m).sum();
    let absolute: f64 = w
        .iter()
        .zip(mass.row_sums())
        .map(|(x, m)| x.abs() * m)
        .sum();
    signed.abs() / absolute
}

/// Discrete best constant `C(a, b) ≈ 1/λ₁` on `build_mesh(a, b, n)`.
pub fn best_constant(a: &PeriodicWeight, b: &PeriodicWeight, n: usize) -> Result<SpectralResult> {
    let mesh = build_mesh(a, b, n)?;
    solve_on_mesh(a, b, &mesh)
}

/// A trial function for the Rayleigh quotient.
#[derive(Clone, Copy, Debug)]
pub enum TrialFunction<'a> {
    /// Closed form, integrated with Gauss panels aligned to all jumps.
    Closed(&'a PeriodicFn),
    /// Piecewise-linear interpolant of nodal values.
    Nodal { mesh: &'a Mesh, values: &'a [f64] },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayleighQuotient {
    /// `∫ a w² / ∫ b w′²`.
    pub quotient: f64,
    /// `|∫ a w| / ∫ a |w|`.
    pub constraint_residual: f64,
}

pub fn rayleigh_quotient(
    a: &PeriodicWeight,
    b: &PeriodicWeight,
    w: TrialFunction<'_>,
) -> Result<RayleighQuotient> {
    let (mass, stiff, signed, absolute) = match w {
        TrialFunction::Closed(f) => {
            let breaks: Vec<f64> = a
                .breakpoints()
                .iter()
                .chain(b.breakpoints())
                .chain(f.kinks())
                .copied()
                .collect();
            let nodes = quad::panel_nodes(&breaks, QUOTIENT_PANELS);
            let rule = Rule::GaussLegendre4;
            (
                quad::integrate_nodes(|t| a.eval(t) * f.value(t).powi(2), &nodes, rule),
                quad::integrate_nodes(|t| b.eval(t) * f.derivative(t).powi(2), &nodes, rule),
                quad::integrate_nodes(|t| a.eval(t) * f.value(t), &nodes, rule),
                quad::integrate_nodes(|t| a.eval(t) * f.value(t).abs(), &nodes, rule),
            )
        }
        TrialFunction::Nodal { mesh, values } => {
            if values.len() != mesh.n() {
                return Err(WirtingerError::InvalidParameter(format!(
                    "{} nodal values for {} nodes",
                    values.len(),
                    mesh.n()
                )));
            }
            let (k, m) = assemble(a, b, mesh);
            let signed: f64 = values.iter().zip(m.row_sums()).map(|(x, r)| x * r).sum();
            let absolute: f64 = values
                .iter()
                .zip(m.row_sums())
                .map(|(x, r)| x.abs() * r)
                .sum();
            (
                m.bilinear(values, values),
                k.bilinear(values, values),
                signed,
                absolute,
            )
        }
    };
    if !(stiff > f64::EPSILON * mass) {
        return Err(WirtingerError::DegenerateFunction(
            "∫ b w′² vanishes; w is constant".into(),
        ));
    }
    Ok(RayleighQuotient {
        quotient: mass / stiff,
        constraint_residual: if absolute > 0.0 {
            signed.abs() / absolute
        } else {
            0.0
        },
    })
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceLevel {
    pub requested_n: usize,
    pub nodes: usize,
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Convergence {
    /// Finest solve, with `constant` replaced by the extrapolated value and
    /// `estimated_order` filled in.
    pub result: SpectralResult,
    pub levels: Vec<ConvergenceLevel>,
    /// Finest unextrapolated constant.
    pub finest_constant: f64,
}

/// Observed order from three successive levels with refinement ratio `r`.
pub fn observed_order(c0: f64, c1: f64, c2: f64, ratio: f64) -> Option<f64> {
    let (d1, d2) = (c1 - c0, c2 - c1);
    if d1 == 0.0 || d2 == 0.0 {
        return None;
    }
    let p = (d1 / d2).abs().ln() / ratio.ln();
    p.is_finite().then_some(p)
}

/// Second-order Richardson extrapolation from the two finest levels.
pub fn richardson(coarse: f64, fine: f64, ratio: f64) -> f64 {
    fine + (fine - coarse) / (ratio * ratio - 1.0)
}

/// Solve at every `n` in `n_list`, estimate the observed order from the last
/// three levels and extrapolate the finest two.
pub fn converge(a: &PeriodicWeight, b: &PeriodicWeight, n_list: &[usize]) -> Result<Convergence> {
    if n_list.len() < 3 {
        return Err(WirtingerError::InvalidParameter(
            "convergence study needs at least three mesh sizes".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WirtingerError::InvalidParameter(
            "mesh sizes must increase".into(),
        ));
    }
    let mut levels = Vec::with_capacity(n_list.len());
    let mut finest = None;
    for &n in n_list {
        let r = best_constant(a, b, n)?;
        levels.push(ConvergenceLevel {
            requested_n: n,
            nodes: r.n,
            constant: r.constant,
        });
        finest = Some(r);
    }
    let mut result = finest.unwrap();
    let k = levels.len();
    let ratio = n_list[k - 1] as f64 / n_list[k - 2] as f64;
    let (c0, c1, c2) = (
        levels[k - 3].constant,
        levels[k - 2].constant,
        levels[k - 1].constant,
    );
    let finest_constant = c2;
    result.estimated_order = observed_order(c0, c1, c2, ratio);
    result.constant = richardson(c1, c2, ratio);
    result.lambda1 = 1.0 / result.constant;
    Ok(Convergence {
        result,
        levels,
        finest_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one() -> PeriodicWeight {
        PeriodicWeight::constant(1.0).unwrap()
    }

    fn bar_a(l: f64) -> PeriodicWeight {
        PeriodicWeight::piecewise_constant(&[0.0, PI / 2.0, PI, 1.5 * PI], &[1.0, l, 1.0, l])
            .unwrap()
    }

    #[test]
    fn mesh_examples() {
        let m = build_mesh(&one(), &one(), 8).unwrap();
        assert_eq!(m.n(), 8);
        let m = build_mesh(&bar_a(4.0), &bar_a(4.0), 8).unwrap();
        for b in [0.0, PI / 2.0, PI, 1.5 * PI] {
            assert!(m.nodes().iter().any(|x| (x - b).abs() < 1e-15));
        }
        let g = PeriodicWeight::piecewise_constant(
            &[0.0, 2.0 * PI / 3.0, PI, PI + 2.0 * PI / 3.0],
            &[1.0, 4.0, 1.0, 4.0],
        )
        .unwrap();
        let m = build_mesh(&g, &one(), 16).unwrap();
        assert!(m.n() >= 16);
        for b in [0.0, 2.0 * PI / 3.0, PI, 5.0 * PI / 3.0] {
            assert!(m.nodes().iter().any(|x| (x - b).abs() < 1e-15));
        }
        assert!(matches!(
            build_mesh(&one(), &one(), 7),
            Err(WirtingerError::MeshTooSmall(7))
        ));
    }

    #[test]
    fn assembly_kernel_and_totals() {
        let mesh = build_mesh(&one(), &one(), 32).unwrap();
        let (k, m) = assemble(&one(), &one(), &mesh);
        assert!(k.row_sums().iter().all(|&r| r == 0.0));
        let applied = k.apply(&vec![1.0; 32]);
        assert!(applied.iter().all(|v| v.abs() < 1e-12));
        assert!((m.total() - TAU).abs() < 1e-13);
        let h = TAU / 32.0;
        assert!(m.row_sums().iter().all(|r| (r - h).abs() < 1e-14));

        let a = bar_a(4.0);
        let mesh = build_mesh(&a, &a, 64).unwrap();
        let (_, m) = assemble(&a, &a, &mesh);
        assert!((m.total() - 5.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn cyclic_solver_matches_dense() {
        let a = PeriodicWeight::sine_family(3.0).unwrap();
        let mesh = build_mesh(&a, &one(), 20).unwrap();
        let (k, m) = assemble(&a, &one(), &mesh);
        let op = k.combine(1.0, &m, 0.7);
        let rhs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin() + 0.1).collect();
        let x = CyclicSolver::new(&op).unwrap().solve(&rhs);
        let back = op.to_dense() * nalgebra::DVector::from_vec(x);
        for (u, v) in back.iter().zip(&rhs) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_matches_dense() {
        let a = PeriodicWeight::sine_family(3.0).unwrap();
        let mesh = build_mesh(&a, &a, 16).unwrap();
        let (k, m) = assemble(&a, &a, &mesh);
        let x: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let y: Vec<f64> = (0..16).map(|i| (i as f64 * 0.3).sin()).collect();
        for mat in [&k, &m] {
            let dense = mat.to_dense();
            let expect = (nalgebra::DVector::from_vec(x.clone()).transpose()
                * &dense
                * nalgebra::DVector::from_vec(y.clone()))[0];
            assert!((mat.bilinear(&x, &y) - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn classical_constant() {
        let r = best_constant(&one(), &one(), 256).unwrap();
        // exact discrete value for uniform P1 elements
        let h = TAU / 256.0;
        let lambda_h = 6.0 / (h * h) * (1.0 - h.cos()) / (2.0 + h.cos());
        assert!(
            (r.lambda1 - lambda_h).abs() < 1e-11 * lambda_h,
            "{} vs {lambda_h}",
            r.lambda1
        );
        assert!(r.constraint_residual < 1e-12);
        let norm: f64 = assemble(&one(), &one(), &build_mesh(&one(), &one(), 256).unwrap())
            .1
            .bilinear(&r.eigenfunction, &r.eigenfunction);
        assert!((norm - TAU).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_quotient_harmonics() {
        let c1 = rayleigh_quotient(&one(), &one(), TrialFunction::Closed(&PeriodicFn::cos(1.0)))
            .unwrap();
        assert!((c1.quotient - 1.0).abs() < 1e-12);
        assert!(c1.constraint_residual < 1e-12);
        let c2 = rayleigh_quotient(&one(), &one(), TrialFunction::Closed(&PeriodicFn::cos(2.0)))
            .unwrap();
        assert!((c2.quotient - 0.25).abs() < 1e-12);
        let flat = PeriodicFn::new("one", |_| 1.0);
        assert!(matches!(
            rayleigh_quotient(&one(), &one(), TrialFunction::Closed(&flat)),
            Err(WirtingerError::DegenerateFunction(_))
        ));
    }

    #[test]
    fn convergence_needs_three_increasing_sizes() {
        assert!(converge(&one(), &one(), &[64, 128]).is_err());
        assert!(converge(&one(), &one(), &[64, 64, 128]).is_err());
    }
}
