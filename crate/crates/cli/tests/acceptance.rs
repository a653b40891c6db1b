//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirtinger::sharpness::{
    bound_power, closed_form_pq0, extremal_fn_pq, extremal_weight_ps, sharpness_characterization,
    verify_sharpness, MuMode, PowerWeightPair,
};
use wirtinger::spectral::{best_constant, converge, rayleigh_quotient, TrialFunction};
use wirtinger::transform::{build_cov, c_pq, h_pq, h_pq_inv};
use wirtinger::{PeriodicWeight, Result};

const N: usize = 2048;
const LEVELS: [usize; 3] = [512, 1024, 2048];
const EQUALITY_CASES: [(f64, f64, f64); 5] = [
    (4.0, 1.0, 0.0),
    (4.0, 2.0, 1.0),
    (9.0, 1.0, 1.0),
    (4.0, 0.5, 0.5),
    (4.0, 0.0, 2.0),
];
const STRICT_CASES: [(f64, f64); 2] = [(1.0, 0.0), (1.0, 1.0)];

type Outcome = Result<(bool, String)>;
type Check = fn() -> Outcome;

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

fn lemma_constant(l: f64) -> f64 {
    (4.0 / PI * l.powf(-0.5).atan()).powi(-2)
}

fn one() -> PeriodicWeight {
    PeriodicWeight::constant(1.0).unwrap()
}

fn classical() -> Outcome {
    let plain = best_constant(&one(), &one(), N)?.constant;
    let study = converge(&one(), &one(), &LEVELS)?;
    let order = study.result.estimated_order.unwrap_or(f64::NAN);
    let extrapolated = study.result.constant;
    let ok = (plain - 1.0).abs() <= 1e-4
        && (extrapolated - 1.0).abs() <= 1e-7
        && (order - 2.0).abs() <= 0.3;
    Ok((
        ok,
        format!("C_2048 = {plain:.10}, extrapolated = {extrapolated:.12}, order = {order:.4}"),
    ))
}

fn piccinini_spagnolo() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in [2.0, 4.0, 10.0] {
        let a = extremal_weight_ps(l)?;
        worst = worst.max(rel(
            converge(&a, &a, &LEVELS)?.result.constant,
            lemma_constant(l),
        ));
    }
    Ok((
        worst <= 3e-3,
        format!("max relative error {worst:.3e} over L = 2, 4, 10"),
    ))
}

fn equality_case() -> Outcome {
    let (mut ok, mut gap, mut quotient) = (true, 0.0f64, 0.0f64);
    for (m, p, q) in EQUALITY_CASES {
        let profile = extremal_fn_pq(m, p, q, MuMode::ContinuityCorrected)?;
        let pair = PowerWeightPair::new(&profile.weight, p, q)?;
        let report = verify_sharpness(&pair, N)?;
        let bound = bound_power(&pair)?;
        let rq = rayleigh_quotient(
            &pair.a()?,
            &pair.b()?,
            TrialFunction::Closed(&profile.extremal_fn),
        )?;
        ok &= report.sharp && report.relative_gap.abs() <= 5e-3 && rel(rq.quotient, bound) <= 1e-6;
        gap = gap.max(report.relative_gap.abs());
        quotient = quotient.max(rel(rq.quotient, bound));
    }
    Ok((
        ok,
        format!("max |gap| {gap:.3e}, max quotient error {quotient:.3e}"),
    ))
}

fn strictness() -> Outcome {
    let sine = PeriodicWeight::sine_family(4.0)?;
    let mut gaps = Vec::new();
    for (p, q) in STRICT_CASES {
        let report = verify_sharpness(&PowerWeightPair::new(&sine, p, q)?, N)?;
        gaps.push(report.relative_gap);
    }
    let ok = gaps.iter().all(|&g| g >= 1e-2);
    Ok((
        ok,
        format!(
            "relative gaps {:.4} (1,0) and {:.4} (1,1)",
            gaps[0], gaps[1]
        ),
    ))
}

fn reciprocal_pairs() -> Outcome {
    // Means: ā(4) is 1 on half the circle and 4 on the other half; the sine
    // family 1 + 3(1 + sin θ)/2 averages to 5/2 as well.
    let cases = [
        (extremal_weight_ps(4.0)?, 2.5),
        (PeriodicWeight::sine_family(4.0)?, 2.5),
    ];
    let (mut spectral_err, mut quotient_err) = (0.0f64, 0.0f64);
    for (a, mean) in cases {
        let b = a.recip()?;
        let want = mean * mean;
        spectral_err = spectral_err.max(rel(converge(&a, &b, &LEVELS)?.result.constant, want));
        let (_, w) = closed_form_pq0(&a, 1.0, 0.7)?;
        quotient_err = quotient_err.max(rel(
            rayleigh_quotient(&a, &b, TrialFunction::Closed(&w))?.quotient,
            want,
        ));
    }
    let ok = spectral_err <= 1e-4 && quotient_err <= 1e-6;
    Ok((
        ok,
        format!("constant error {spectral_err:.3e}, extremizer quotient error {quotient_err:.3e}"),
    ))
}

fn transform_invariance() -> Outcome {
    let step = |t: &[f64], v: &[f64]| PeriodicWeight::piecewise_constant(t, v);
    let sine = PeriodicWeight::sine_family(4.0)?;
    let pairs = [
        (extremal_weight_ps(4.0)?, one()),
        (sine.clone(), one()),
        (
            step(&[0.0, 1.0, 2.5], &[1.0, 3.0, 2.0])?,
            step(&[0.0, 0.7, 4.0], &[2.0, 1.0, 5.0])?,
        ),
        (sine.clone(), PeriodicWeight::sine_family(2.0)?.shift(1.3)?),
        (step(&[0.0, 2.0], &[1.0, 6.0])?, sine),
    ];
    let mut worst: f64 = 0.0;
    for (a, b) in pairs {
        let cov = build_cov(&a, &b)?;
        let g = cov.transported_geometric_mean()?;
        let direct = best_constant(&a, &b, N)?.constant;
        let transported = cov.c().powi(2) * best_constant(&g, &g, N)?.constant;
        worst = worst.max(rel(direct, transported));
    }
    Ok((
        worst <= 1e-3,
        format!("max relative disagreement {worst:.3e} over 5 pairs"),
    ))
}

fn mu_adjudication() -> Outcome {
    let corrected = extremal_fn_pq(4.0, 1.0, 0.0, MuMode::ContinuityCorrected)?;
    let literal = extremal_fn_pq(4.0, 1.0, 0.0, MuMode::PaperLiteral)?;
    let max = |xs: [f64; 4]| xs.iter().copied().fold(0.0, f64::max);
    let min = |xs: [f64; 4]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    let cont = max(corrected.continuity_residuals());
    let broken = min(literal.continuity_residuals());
    let trans = max(corrected.transmission_residuals());
    let ok = cont <= 1e-12 && broken >= 1e-3 && trans <= 1e-10;
    Ok((
        ok,
        format!("corrected {cont:.1e}, literal {broken:.3e}, transmission {trans:.1e}"),
    ))
}

fn homeomorphisms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut round, mut lift, mut c_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    while count < 10 {
        let (m, p, q) = (
            rng.gen_range(1.5..20.0),
            rng.gen_range(-2.0..3.0),
            rng.gen_range(-2.0..3.0),
        );
        if p + q <= 0.1 {
            continue;
        }
        count += 1;
        let (h, hinv) = (h_pq(m, p, q)?, h_pq_inv(m, p, q)?);
        for k in 0..1000 {
            let x = -TAU + 3.0 * TAU * k as f64 / 1000.0;
            round = round
                .max((h.eval(hinv.eval(x)) - x).abs())
                .max((hinv.eval(h.eval(x)) - x).abs());
            lift = lift
                .max((h.eval(x + TAU) - h.eval(x) - TAU).abs())
                .max((hinv.eval(x + TAU) - hinv.eval(x) - TAU).abs());
        }
        let g = wirtinger::sharpness::extremal_weight_pq(m, p, q)?;
        let c = build_cov(&g.power(p)?, &g.power(q)?)?.c();
        c_err = c_err.max((c - c_pq(m, p, q)).abs());
    }
    let ok = round <= 1e-10 && lift <= 1e-10 && c_err <= 1e-12;
    Ok((
        ok,
        format!("round trip {round:.1e}, lift {lift:.1e}, c error {c_err:.1e}"),
    ))
}

fn characterization() -> Outcome {
    let mut cases = Vec::new();
    for (m, p, q) in EQUALITY_CASES {
        let g = wirtinger::sharpness::extremal_weight_pq(m, p, q)?;
        cases.push((
            format!("bar-gamma:{m},{p},{q}"),
            PowerWeightPair::new(&g, p, q)?,
        ));
    }
    let sine = PeriodicWeight::sine_family(4.0)?;
    for (p, q) in STRICT_CASES {
        cases.push((
            format!("sine:4 ({p},{q})"),
            PowerWeightPair::new(&sine, p, q)?,
        ));
    }
    let mut disagreements = Vec::new();
    for (name, pair) in &cases {
        let spectral = verify_sharpness(pair, N)?.sharp;
        let functional = sharpness_characterization(&pair.a()?, &pair.b()?, N)?.is_sharp;
        if spectral != functional {
            disagreements.push(name.clone());
        }
    }
    let detail = if disagreements.is_empty() {
        format!("{} cases agree", cases.len())
    } else {
        format!("disagree on {}", disagreements.join(", "))
    };
    Ok((disagreements.is_empty(), detail))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &[
            "verify",
            "--gamma",
            "bar-gamma:4,1,0",
            "--p",
            "1",
            "--q",
            "0",
            "--n",
            "512",
        ],
        &[
            "sweep", "--family", "pq", "--m-list", "4,9", "--p-list", "1,2", "--q-list", "0,1",
            "--n", "256",
        ],
        &[
            "transform-check",
            "--a",
            "sine:4",
            "--b",
            "bar-a:4",
            "--pq",
            "4,1,0",
            "--seed",
            "11",
        ],
        &[
            "solve",
            "--a",
            "sine:3",
            "--b",
            "const:1",
            "--n-list",
            "64,128,256",
        ],
    ];
    let mut bad = Vec::new();
    for args in runs {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                Command::new(env!("CARGO_BIN_EXE_wirtinger"))
                    .args(args)
                    .env_remove("WIRTINGER_DEFAULT_N")
                    .output()
                    .expect("run wirtinger")
            })
            .map(|o| {
                if o.status.success() {
                    o.stdout
                } else {
                    Vec::new()
                }
            })
            .collect();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            bad.push(args[0]);
        }
    }
    let detail = if bad.is_empty() {
        "4 commands byte-identical across runs".to_string()
    } else {
        format!("differs: {}", bad.join(", "))
    };
    Ok((bad.is_empty(), detail))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("classical Wirtinger constant", classical),
        ("Piccinini-Spagnolo equality case", piccinini_spagnolo),
        ("power-family equality case", equality_case),
        ("strict gap for non-extremal weights", strictness),
        ("reciprocal pair closed form", reciprocal_pairs),
        ("transform invariance", transform_invariance),
        ("mu exponent adjudication", mu_adjudication),
        ("homeomorphism identities", homeomorphisms),
        ("characterization agreement", characterization),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {:<38} {}  ({detail})",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
