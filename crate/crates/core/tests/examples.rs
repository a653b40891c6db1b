use std::f64::consts::{FRAC_PI_2, PI, TAU};

use approx::assert_relative_eq;
use wirtinger::sharpness::{
    bound_general, bound_power, closed_form_pq0, extremal_fn_pq, extremal_fn_ps,
    extremal_weight_pq, extremal_weight_ps, mu, MuMode, PowerWeightPair,
};
use wirtinger::spectral::{assemble, best_constant, build_mesh, rayleigh_quotient, TrialFunction};
use wirtinger::transform::{build_cov, c_pq, h_pq, h_pq_inv};
use wirtinger::{PeriodicFn, PeriodicWeight};

fn one() -> PeriodicWeight {
    PeriodicWeight::constant(1.0).unwrap()
}

fn bar_a4() -> PeriodicWeight {
    extremal_weight_ps(4.0).unwrap()
}

fn lemma_constant(l: f64) -> f64 {
    (4.0 / PI * l.powf(-0.5).atan()).powi(-2)
}

#[test]
fn weight_evaluation_bounds_and_integrals() {
    assert_eq!(one().eval(5.0), 1.0);
    assert_eq!(bar_a4().eval(FRAC_PI_2), 4.0);
    assert_eq!(bar_a4().eval(FRAC_PI_2 + TAU), 4.0);

    let b = bar_a4().ess_bounds();
    assert_eq!((b.inf, b.sup, b.ratio), (1.0, 4.0, 4.0));
    let sine = PeriodicWeight::closed_form("sine", |t| 1.0 + (1.0 + t.sin()) * 1.5)
        .unwrap()
        .ess_bounds();
    assert_relative_eq!(sine.inf, 1.0, epsilon = 1e-6);
    assert_relative_eq!(sine.sup, 4.0, epsilon = 1e-6);

    assert_relative_eq!(
        bar_a4().integrate(0.0, TAU).unwrap(),
        5.0 * PI,
        max_relative = 1e-15
    );
    assert_relative_eq!(
        one().integrate(0.0, TAU).unwrap(),
        TAU,
        max_relative = 1e-15
    );
    assert_relative_eq!(bar_a4().antiderivative(PI), 2.5 * PI, max_relative = 1e-15);
    assert_eq!(one().mean(), 1.0);
    assert_relative_eq!(bar_a4().mean(), 2.5, max_relative = 1e-15);
}

#[test]
fn weight_powers() {
    let inv = bar_a4().power(-1.0).unwrap();
    assert_eq!(inv.pieces().unwrap().1, &[1.0, 0.25, 1.0, 0.25][..]);
    let sine = PeriodicWeight::sine_family(4.0).unwrap();
    assert_eq!(sine.power(0.0).unwrap().eval(1.3), 1.0);
    let g = extremal_weight_pq(4.0, 1.0, 0.0).unwrap();
    let half = g.power(0.5).unwrap();
    let mut values = half.pieces().unwrap().1.to_vec();
    values.dedup();
    values.sort_by(f64::total_cmp);
    values.dedup();
    assert_eq!(values, vec![1.0, 2.0]);
    assert_relative_eq!(half.mean(), 4.0 / 3.0, max_relative = 1e-15);
}

#[test]
fn change_of_variables_examples() {
    let cov = build_cov(&bar_a4(), &bar_a4()).unwrap();
    assert_eq!(cov.c(), 1.0);
    for t in [0.1, 1.7, 4.0] {
        assert_relative_eq!(cov.forward(t), t, epsilon = 1e-14);
    }

    let cov = build_cov(&bar_a4().power(2.0).unwrap(), &one()).unwrap();
    assert_relative_eq!(cov.c(), 2.5, max_relative = 1e-15);
    let slope = |t: f64| (cov.forward(t + 1e-6) - cov.forward(t - 1e-6)) / 2e-6;
    assert_relative_eq!(slope(0.4), 0.4, max_relative = 1e-8);
    assert_relative_eq!(slope(2.0), 1.6, max_relative = 1e-8);
    for t in [0.3, 2.9, 5.5] {
        assert_relative_eq!(cov.inverse(cov.forward(t)), t, epsilon = 1e-12);
    }

    let g = extremal_weight_pq(4.0, 1.0, 0.0).unwrap();
    assert_relative_eq!(
        build_cov(&g, &one()).unwrap().c(),
        4.0 / 3.0,
        max_relative = 1e-14
    );
}

#[test]
fn transported_geometric_mean_examples() {
    let k = PeriodicWeight::constant(2.7).unwrap();
    let g = build_cov(&k, &k)
        .unwrap()
        .transported_geometric_mean()
        .unwrap();
    assert_relative_eq!(g.eval(1.0), 2.7, max_relative = 1e-15);

    let a = extremal_weight_pq(4.0, 1.0, 1.0).unwrap();
    let g = build_cov(&a, &a)
        .unwrap()
        .transported_geometric_mean()
        .unwrap();
    for t in [0.2, 1.8, 3.3, 5.0] {
        assert_eq!(g.eval(t), a.eval(t));
    }

    // Breakpoints {2π/3, π, 5π/3} are pushed to multiples of π/2 and the
    // values become √(1·1) = 1 and √(4·1) = 2.
    let gbar = extremal_weight_pq(4.0, 1.0, 0.0).unwrap();
    let g = build_cov(&gbar, &one())
        .unwrap()
        .transported_geometric_mean()
        .unwrap();
    let (breaks, values) = g.pieces().unwrap();
    for (got, want) in breaks.iter().zip([0.0, FRAC_PI_2, PI, 1.5 * PI]) {
        assert_relative_eq!(*got, want, epsilon = 1e-12);
    }
    assert_eq!(values, &[1.0, 2.0, 1.0, 2.0][..]);
}

#[test]
fn substitution_examples() {
    use wirtinger::quad::Rule;
    let cov = build_cov(&one(), &one()).unwrap();
    assert!(
        cov.substitution_check(&PeriodicFn::cos(1.0), 4096, Rule::default())
            .unwrap()
            .max()
            <= 1e-8
    );

    let profile = extremal_fn_ps(4.0).unwrap();
    let cov = build_cov(&bar_a4(), &bar_a4()).unwrap();
    assert!(
        cov.substitution_check(&profile.extremal_fn, 4096, Rule::default())
            .unwrap()
            .max()
            <= 1e-6
    );

    let g = extremal_weight_pq(4.0, 1.0, 0.0).unwrap();
    let cov = build_cov(&g, &one()).unwrap();
    assert!(
        cov.substitution_check(&PeriodicFn::sin(1.0), 4096, Rule::default())
            .unwrap()
            .max()
            <= 1e-6
    );
}

#[test]
fn homeomorphism_examples() {
    let h = h_pq(3.0, 1.5, 1.5).unwrap();
    assert_eq!(c_pq(3.0, 1.5, 1.5), 1.0);
    for x in [0.3, 2.0, 6.0] {
        assert_relative_eq!(h.eval(x), x, epsilon = 1e-14);
    }

    assert_relative_eq!(c_pq(4.0, 1.0, 0.0), 4.0 / 3.0, max_relative = 1e-15);
    let (h, hinv) = (
        h_pq(4.0, 1.0, 0.0).unwrap(),
        h_pq_inv(4.0, 1.0, 0.0).unwrap(),
    );
    assert_relative_eq!(h.eval(FRAC_PI_2), 2.0 * PI / 3.0, max_relative = 1e-14);
    assert_relative_eq!(
        hinv.slope(0.5 * (2.0 * PI / 3.0 + PI)),
        1.5,
        max_relative = 1e-14
    );
    for x in [0.1, 1.0, 2.5, 4.0, 6.2] {
        assert_relative_eq!(h.eval(hinv.eval(x)), x, epsilon = 1e-12);
    }
}

#[test]
fn mesh_and_assembly_examples() {
    let mesh = build_mesh(&one(), &one(), 8).unwrap();
    assert_eq!(mesh.n(), 8);
    for (i, t) in mesh.nodes().iter().enumerate() {
        assert_relative_eq!(*t, i as f64 * TAU / 8.0, epsilon = 1e-14);
    }

    let contains = |nodes: &[f64], t: f64| nodes.iter().any(|x| (x - t).abs() < 1e-12);
    let mesh = build_mesh(&bar_a4(), &bar_a4(), 8).unwrap();
    assert!([0.0, FRAC_PI_2, PI, 1.5 * PI]
        .iter()
        .all(|&t| contains(mesh.nodes(), t)));
    let g = extremal_weight_pq(4.0, 1.0, 0.0).unwrap();
    let mesh = build_mesh(&g, &one(), 16).unwrap();
    assert!([0.0, 2.0 * PI / 3.0, PI, 5.0 * PI / 3.0]
        .iter()
        .all(|&t| contains(mesh.nodes(), t)));

    let mesh = build_mesh(&one(), &one(), 64).unwrap();
    let (k, m) = assemble(&one(), &one(), &mesh);
    assert!(k.row_sums().iter().all(|r| r.abs() < 1e-12));
    assert!(k.apply(&vec![1.0; 64]).iter().all(|r| r.abs() < 1e-12));
    assert!(m.row_sums().iter().all(|r| (r - TAU / 64.0).abs() < 1e-14));
    assert_relative_eq!(m.total(), TAU, max_relative = 1e-14);

    let mesh = build_mesh(&bar_a4(), &one(), 64).unwrap();
    let (_, m) = assemble(&bar_a4(), &one(), &mesh);
    assert_relative_eq!(m.total(), 5.0 * PI, max_relative = 1e-14);
}

#[test]
fn best_constant_examples() {
    assert!((best_constant(&one(), &one(), 2048).unwrap().constant - 1.0).abs() <= 1e-4);
    let c = best_constant(&bar_a4(), &bar_a4(), 2048).unwrap().constant;
    assert_relative_eq!(c, lemma_constant(4.0), max_relative = 3e-3);
    assert_relative_eq!(c, 2.8695, max_relative = 1e-4);
    let c = best_constant(&bar_a4(), &bar_a4().recip().unwrap(), 2048)
        .unwrap()
        .constant;
    assert!((c - 6.25).abs() <= 1e-3);
}

#[test]
fn rayleigh_quotient_examples() {
    let rq =
        rayleigh_quotient(&one(), &one(), TrialFunction::Closed(&PeriodicFn::cos(1.0))).unwrap();
    assert_relative_eq!(rq.quotient, 1.0, max_relative = 1e-12);
    assert!(rq.constraint_residual < 1e-14);
    let rq =
        rayleigh_quotient(&one(), &one(), TrialFunction::Closed(&PeriodicFn::cos(2.0))).unwrap();
    assert_relative_eq!(rq.quotient, 0.25, max_relative = 1e-12);

    let profile = extremal_fn_ps(4.0).unwrap();
    let rq = rayleigh_quotient(
        &bar_a4(),
        &bar_a4(),
        TrialFunction::Closed(&profile.extremal_fn),
    )
    .unwrap();
    assert!((rq.quotient - lemma_constant(4.0)).abs() <= 1e-6);
    assert!(rq.constraint_residual <= 1e-8);
    assert_relative_eq!(
        rq.quotient,
        1.0 / profile.lambda.unwrap(),
        max_relative = 1e-10
    );
}

#[test]
fn bound_examples() {
    assert_relative_eq!(
        bound_general(&one(), &one()).unwrap(),
        1.0,
        max_relative = 1e-15
    );
    assert_relative_eq!(
        bound_general(&bar_a4(), &bar_a4()).unwrap(),
        lemma_constant(4.0),
        max_relative = 1e-14
    );
    let recip = bar_a4().recip().unwrap();
    assert_relative_eq!(
        bound_general(&bar_a4(), &recip).unwrap(),
        6.25,
        max_relative = 1e-14
    );

    let sine = PeriodicWeight::sine_family(3.0).unwrap();
    let pair = PowerWeightPair::new(&sine, 0.0, 0.0).unwrap();
    assert_relative_eq!(bound_power(&pair).unwrap(), 1.0, max_relative = 1e-14);
    let pair = PowerWeightPair::new(&bar_a4(), 1.0, 1.0).unwrap();
    assert_relative_eq!(
        bound_power(&pair).unwrap(),
        lemma_constant(4.0),
        max_relative = 1e-14
    );
    let g = extremal_weight_pq(4.0, 1.0, 0.0).unwrap();
    let pair = PowerWeightPair::new(&g, 1.0, 0.0).unwrap();
    let want = (4.0 / 3.0 / (4.0 / PI * 4f64.powf(-0.25).atan())).powi(2);
    assert_relative_eq!(bound_power(&pair).unwrap(), want, max_relative = 1e-14);
    assert_relative_eq!(bound_power(&pair).unwrap(), 2.895, max_relative = 1e-3);
}

#[test]
fn power_bound_reduces_to_general_bound_when_exponents_agree() {
    for gamma in [
        PeriodicWeight::sine_family(5.0).unwrap(),
        bar_a4(),
        extremal_weight_pq(9.0, 2.0, 1.0).unwrap(),
    ] {
        for p in [0.5, 1.0, 2.0] {
            let pair = PowerWeightPair::new(&gamma, p, p).unwrap();
            let general = bound_general(&pair.a().unwrap(), &pair.b().unwrap()).unwrap();
            assert_relative_eq!(bound_power(&pair).unwrap(), general, max_relative = 1e-12);
        }
    }
}

#[test]
fn extremal_profile_examples() {
    let profile = extremal_fn_ps(1.0).unwrap();
    assert_eq!(profile.lambda, Some(1.0));
    assert_eq!(profile.weight.ess_bounds().sup, 1.0);
    // w̄ is a multiple of sin(θ − π/4) when L = 1.
    let w = &profile.extremal_fn;
    let scale = w.value(PI * 0.75);
    for t in [0.0, 1.0, 2.5, 4.0] {
        assert_relative_eq!(w.value(t), scale * (t - PI / 4.0).sin(), epsilon = 1e-12);
    }

    let profile = extremal_fn_ps(4.0).unwrap();
    let s = profile.lambda.unwrap().sqrt() * PI / 4.0;
    assert_relative_eq!(s.tan(), 0.5, max_relative = 1e-14);
    assert!(profile.continuity_residuals().iter().all(|r| *r <= 1e-12));

    let g = extremal_weight_pq(4.0, 2.0, 2.0).unwrap();
    assert_eq!(g.pieces().unwrap().0, bar_a4().pieces().unwrap().0);
    let breaks = |m, p, q| {
        extremal_weight_pq(m, p, q)
            .unwrap()
            .pieces()
            .unwrap()
            .0
            .to_vec()
    };
    for (got, want) in breaks(4.0, 1.0, 0.0)
        .iter()
        .zip([0.0, 2.0 * PI / 3.0, PI, 5.0 * PI / 3.0])
    {
        assert_relative_eq!(*got, want, epsilon = 1e-14);
    }
    assert_relative_eq!(c_pq(4.0, 0.0, 1.0), 2.0 / 3.0, max_relative = 1e-15);
    for (got, want) in breaks(4.0, 0.0, 1.0)
        .iter()
        .zip([0.0, PI / 3.0, PI, 4.0 * PI / 3.0])
    {
        assert_relative_eq!(*got, want, epsilon = 1e-14);
    }
}

#[test]
fn pq_profile_examples() {
    let m = 1.0 + 1e-9;
    let (lit, cor) = (
        mu(m, 1.0, 0.0, MuMode::PaperLiteral),
        mu(m, 1.0, 0.0, MuMode::ContinuityCorrected),
    );
    assert!((lit - cor).abs() < 1e-8 && (cor - 1.0).abs() < 1e-8);

    let pq = extremal_fn_pq(4.0, 1.0, 1.0, MuMode::ContinuityCorrected).unwrap();
    let ps = extremal_fn_ps(4.0).unwrap();
    assert_relative_eq!(pq.mu.unwrap(), ps.lambda.unwrap(), max_relative = 1e-14);
    for k in 0..1000 {
        let t = k as f64 * TAU / 1000.0;
        assert!((pq.extremal_fn.value(t) - ps.extremal_fn.value(t)).abs() <= 1e-12);
    }

    let lit = extremal_fn_pq(4.0, 1.0, 0.0, MuMode::PaperLiteral).unwrap();
    let s = lit.mu.unwrap().sqrt() * PI / 4.0;
    assert!((s.sin() - 4f64.powf(-0.25) * s.cos()).abs() > 0.1);
}

#[test]
fn reciprocal_pair_closed_form_examples() {
    let (c, w) = closed_form_pq0(&one(), 1.0, 0.4).unwrap();
    assert_relative_eq!(c, 1.0, max_relative = 1e-15);
    for t in [0.0, 1.0, 3.0] {
        assert_relative_eq!(w.value(t), (t + 0.4).cos(), epsilon = 1e-12);
    }

    let (c, w) = closed_form_pq0(&bar_a4(), 2.0, 0.3).unwrap();
    assert_relative_eq!(c, 6.25, max_relative = 1e-15);
    let rq = rayleigh_quotient(
        &bar_a4(),
        &bar_a4().recip().unwrap(),
        TrialFunction::Closed(&w),
    )
    .unwrap();
    assert_relative_eq!(rq.quotient, 6.25, max_relative = 1e-10);
    assert!(rq.constraint_residual <= 1e-8);
}

#[test]
fn sharpness_is_invariant_under_rotation() {
    use wirtinger::sharpness::verify_sharpness;
    for (gamma, p, q) in [
        (extremal_weight_pq(4.0, 1.0, 0.0).unwrap(), 1.0, 0.0),
        (PeriodicWeight::sine_family(4.0).unwrap(), 1.0, 1.0),
    ] {
        let pair = PowerWeightPair::new(&gamma, p, q).unwrap();
        let base = verify_sharpness(&pair, 1024).unwrap();
        for phi in [0.3, 1.7] {
            let rotated = verify_sharpness(&pair.shifted(phi).unwrap(), 1024).unwrap();
            assert_eq!(rotated.sharp, base.sharp);
            assert_relative_eq!(rotated.bound, base.bound, max_relative = 1e-6);
            assert_relative_eq!(rotated.computed, base.computed, max_relative = 1e-6);
        }
    }
}
