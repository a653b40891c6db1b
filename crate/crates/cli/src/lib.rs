//! Command dispatch for the `wirtinger` binary.

pub mod report;
pub mod weight_spec;

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use wirtinger::quad::Rule;
use wirtinger::sharpness::{
    self, bound_general, bound_power, extremal_fn_pq, extremal_fn_ps, lambda_ps, mu,
    verify_sharpness, MuMode, PowerWeightPair,
};
use wirtinger::spectral::{self, rayleigh_quotient, TrialFunction};
use wirtinger::transform::{build_cov, c_pq, h_pq, h_pq_inv};
use wirtinger::{PeriodicFn, PeriodicWeight, WirtingerError};

use report::{num, nums, opt_num, Cell, Report, Table, SCHEMA};
use weight_spec::parse_weight;

pub const DEFAULT_N_ENV: &str = "WIRTINGER_DEFAULT_N";
pub const DEFAULT_SAMPLES: usize = 2048;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("solver failure: {0}")]
    Solver(#[from] WirtingerError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `ā` with level `L`.
    Ps,
    /// `γ̄_{p,q}` with level `M`.
    Pq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Bound {
        a: Option<String>,
        b: Option<String>,
        gamma: Option<String>,
        p: Option<f64>,
        q: Option<f64>,
    },
    Solve {
        a: String,
        b: String,
        n_list: Option<Vec<usize>>,
    },
    Extremal {
        family: Family,
        l: Option<f64>,
        m: Option<f64>,
        p: Option<f64>,
        q: Option<f64>,
    },
    Verify {
        gamma: String,
        p: f64,
        q: f64,
    },
    Sweep {
        family: Option<Family>,
        gamma: Option<String>,
        l_list: Vec<f64>,
        m_list: Vec<f64>,
        p_list: Vec<f64>,
        q_list: Vec<f64>,
    },
    TransformCheck {
        a: String,
        b: String,
        /// `(M, p, q)` for the homeomorphism checks.
        pq: Option<(f64, f64, f64)>,
        harmonic: f64,
        panels: usize,
        probes: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound { .. } => "bound",
            Command::Solve { .. } => "solve",
            Command::Extremal { .. } => "extremal",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
            Command::TransformCheck { .. } => "transform-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub mu_mode: MuMode,
    pub format: OutputFormat,
    pub samples: usize,
    pub seed: u64,
    /// Include wall time in the report (breaks byte-for-byte reproducibility).
    pub timing: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            n: default_n(),
            mu_mode: MuMode::default(),
            format: OutputFormat::default(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            timing: false,
        }
    }
}

/// Mesh size from `WIRTINGER_DEFAULT_N`, else the library default.
pub fn default_n() -> usize {
    std::env::var(DEFAULT_N_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(spectral::DEFAULT_N)
}

fn missing(what: &str) -> CliError {
    CliError::Parse(format!("missing {what}"))
}

fn mode_name(mode: MuMode) -> &'static str {
    match mode {
        MuMode::PaperLiteral => "paper_literal",
        MuMode::ContinuityCorrected => "continuity_corrected",
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    if cfg.n < spectral::MIN_NODES {
        return Err(CliError::Parse(format!(
            "`--n {}`: need n ≥ {}",
            cfg.n,
            spectral::MIN_NODES
        )));
    }
    let started = Instant::now();
    let mut parameters = Map::new();
    parameters.insert("n".into(), Value::from(cfg.n));
    parameters.insert("seed".into(), Value::from(cfg.seed));
    parameters.insert("mu_mode".into(), Value::from(mode_name(cfg.mu_mode)));
    parameters.insert("samples".into(), Value::from(cfg.samples));

    let mut out = Output::default();
    match &cfg.command {
        Command::Bound { a, b, gamma, p, q } => {
            run_bound(a, b, gamma, *p, *q, &mut parameters, &mut out)?
        }
        Command::Solve { a, b, n_list } => {
            run_solve(cfg, a, b, n_list.as_deref(), &mut parameters, &mut out)?
        }
        Command::Extremal { family, l, m, p, q } => {
            run_extremal(cfg, *family, *l, *m, *p, *q, &mut parameters, &mut out)?
        }
        Command::Verify { gamma, p, q } => {
            run_verify(cfg, gamma, *p, *q, &mut parameters, &mut out)?
        }
        Command::Sweep {
            family,
            gamma,
            l_list,
            m_list,
            p_list,
            q_list,
        } => run_sweep(
            cfg,
            *family,
            gamma.as_deref(),
            l_list,
            m_list,
            p_list,
            q_list,
            &mut parameters,
            &mut out,
        )?,
        Command::TransformCheck {
            a,
            b,
            pq,
            harmonic,
            panels,
            probes,
        } => run_transform_check(
            cfg,
            a,
            b,
            *pq,
            *harmonic,
            *panels,
            *probes,
            &mut parameters,
            &mut out,
        )?,
    }

    let mut json = Map::new();
    json.insert("schema".into(), Value::from(SCHEMA));
    json.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    json.insert("command".into(), Value::from(cfg.command.name()));
    json.insert("parameters".into(), Value::Object(parameters));
    json.insert("results".into(), Value::Object(out.results));
    if let Some(conv) = out.convergence {
        json.insert("convergence".into(), conv);
    }
    if let Some(rows) = &out.rows {
        json.insert("rows".into(), rows.to_json());
    }
    if cfg.timing {
        json.insert("wall_time_s".into(), num(started.elapsed().as_secs_f64()));
    }
    Ok(Report {
        json: Value::Object(json),
        rows: out.rows,
        fn_dump: out.fn_dump,
    })
}

#[derive(Default)]
struct Output {
    results: Map<String, Value>,
    convergence: Option<Value>,
    rows: Option<Table>,
    fn_dump: Option<Table>,
}

impl Output {
    fn set(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }
}

fn weight_param(
    params: &mut Map<String, Value>,
    key: &str,
    spec: &str,
) -> Result<PeriodicWeight, CliError> {
    let w = parse_weight(spec)?;
    params.insert(key.into(), Value::from(spec));
    Ok(w)
}

/// `samples` uniform angles merged with the weight breakpoints.
fn sample_grid(samples: usize, breaks: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..samples.max(1))
        .map(|k| k as f64 * TAU / samples.max(1) as f64)
        .collect();
    grid.extend_from_slice(breaks);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    grid
}

fn run_bound(
    a: &Option<String>,
    b: &Option<String>,
    gamma: &Option<String>,
    p: Option<f64>,
    q: Option<f64>,
    params: &mut Map<String, Value>,
    out: &mut Output,
) -> Result<(), CliError> {
    if let Some(gamma) = gamma {
        let (p, q) = (
            p.ok_or_else(|| missing("--p"))?,
            q.ok_or_else(|| missing("--q"))?,
        );
        let g = weight_param(params, "gamma", gamma)?;
        params.insert("p".into(), num(p));
        params.insert("q".into(), num(q));
        let pair = PowerWeightPair::new(&g, p, q)?;
        out.set("kind", Value::from("power"));
        out.set("bound", num(bound_power(&pair)?));
        out.set("general_bound", num(bound_general(&pair.a()?, &pair.b()?)?));
        out.set("m", num(pair.m()));
        out.set(
            "mean_gamma_power",
            num(pair.gamma().power((p - q) / 2.0)?.mean()),
        );
        if pair.m() > 1.0 && p + q > 0.0 {
            out.set("c_pq", num(c_pq(pair.m(), p, q)));
            out.set("mu", num(mu(pair.m(), p, q, MuMode::ContinuityCorrected)));
        }
        return Ok(());
    }
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (weight_param(params, "a", a)?, weight_param(params, "b", b)?),
        _ => return Err(missing("--a and --b (or --gamma with --p and --q)")),
    };
    let product = a.mul(&b)?.ess_bounds();
    out.set("kind", Value::from("general"));
    out.set("bound", num(bound_general(&a, &b)?));
    out.set("mean_sqrt_ratio", num(a.div(&b)?.sqrt()?.mean()));
    out.set("inf_ab", num(product.inf));
    out.set("sup_ab", num(product.sup));
    Ok(())
}

fn run_solve(
    cfg: &RunConfig,
    a: &str,
    b: &str,
    n_list: Option<&[usize]>,
    params: &mut Map<String, Value>,
    out: &mut Output,
) -> Result<(), CliError> {
    let (a, b) = (weight_param(params, "a", a)?, weight_param(params, "b", b)?);
    let result = match n_list {
        Some(list) => {
            if list.iter().any(|&n| n < spectral::MIN_NODES) {
                return Err(CliError::Parse(format!(
                    "`--n-list`: every n must be ≥ {}",
                    spectral::MIN_NODES
                )));
            }
            params.insert("n_list".into(), Value::from(list.to_vec()));
            let study = spectral::converge(&a, &b, list)?;
            out.convergence = Some(Value::Array(
                study
                    .levels
                    .iter()
                    .map(|l| json!({"n": l.requested_n, "nodes": l.nodes, "constant": num(l.constant)}))
                    .collect(),
            ));
            out.set("extrapolated", Value::Bool(true));
            out.set("finest_constant", num(study.finest_constant));
            study.result
        }
        None => {
            out.set("extrapolated", Value::Bool(false));
            spectral::best_constant(&a, &b, cfg.n)?
        }
    };
    out.set("constant", num(result.constant));
    out.set("lambda1", num(result.lambda1));
    out.set("nodes", Value::from(result.n));
    out.set("estimated_order", opt_num(result.estimated_order));
    out.set("constraint_residual", num(result.constraint_residual));
    out.set("bound", num(bound_general(&a, &b)?));

    let mut dump = Table::new(&["theta", "a", "b", "eigenfunction"]);
    for (&t, &w) in result.nodes.iter().zip(&result.eigenfunction) {
        dump.push(vec![
            Cell::Num(t),
            Cell::Num(a.eval(t)),
            Cell::Num(b.eval(t)),
            Cell::Num(w),
        ]);
    }
    out.fn_dump = Some(dump);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_extremal(
    cfg: &RunConfig,
    family: Family,
    l: Option<f64>,
    m: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
    params: &mut Map<String, Value>,
    out: &mut Output,
) -> Result<(), CliError> {
    let profile = match family {
        Family::Ps => {
            let l = l.ok_or_else(|| missing("--l"))?;
            params.insert("family".into(), Value::from("ps"));
            params.insert("l".into(), num(l));
            extremal_fn_ps(l)?
        }
        Family::Pq => {
            let m = m.ok_or_else(|| missing("--m"))?;
            let p = p.ok_or_else(|| missing("--p"))?;
            let q = q.ok_or_else(|| missing("--q"))?;
            params.insert("family".into(), Value::from("pq"));
            params.insert("m".into(), num(m));
            params.insert("p".into(), num(p));
            params.insert("q".into(), num(q));
            extremal_fn_pq(m, p, q, cfg.mu_mode)?
        }
    };
    let (a, b) = (profile.a()?, profile.b()?);
    let rq = rayleigh_quotient(&a, &b, TrialFunction::Closed(&profile.extremal_fn))?;
    out.set("weight", Value::from(profile.weight.label()));
    out.set("constant", num(profile.constant()));
    out.set("bound", num(bound_general(&a, &b)?));
    out.set("c_pq", opt_num(profile.c_pq));
    out.set("mu", opt_num(profile.mu));
    out.set("lambda", opt_num(profile.lambda));
    out.set(
        "mu_mode",
        profile
            .mu_mode
            .map(|m| Value::from(mode_name(m)))
            .unwrap_or(Value::Null),
    );
    out.set("breakpoints", nums(&profile.breakpoints()));
    out.set(
        "continuity_residuals",
        nums(&profile.continuity_residuals()),
    );
    out.set(
        "transmission_residuals",
        nums(&profile.transmission_residuals()),
    );
    out.set("rayleigh_quotient", num(rq.quotient));
    out.set("constraint_residual", num(rq.constraint_residual));

    let mut dump = Table::new(&["theta", "weight", "extremal_fn"]);
    for t in sample_grid(cfg.samples, &profile.breakpoints()) {
        dump.push(vec![
            Cell::Num(t),
            Cell::Num(profile.weight.eval(t)),
            Cell::Num(profile.extremal_fn.value(t)),
        ]);
    }
    out.fn_dump = Some(dump);
    Ok(())
}

fn run_verify(
    cfg: &RunConfig,
    gamma: &str,
    p: f64,
    q: f64,
    params: &mut Map<String, Value>,
    out: &mut Output,
) -> Result<(), CliError> {
    let g = weight_param(params, "gamma", gamma)?;
    params.insert("p".into(), num(p));
    params.insert("q".into(), num(q));
    let pair = PowerWeightPair::new(&g, p, q)?;
    let report = verify_sharpness(&pair, cfg.n)?;
    out.set("bound", num(report.bound));
    out.set("computed", num(report.computed));
    out.set("relative_gap", num(report.relative_gap));
    out.set("sharp", Value::Bool(report.sharp));
    out.set("estimated_order", opt_num(report.estimated_order));
    out.set("finest_constant", num(report.finest_constant));
    out.set("m", num(pair.m()));
    if pair.m() > 1.0 && p + q > 0.0 {
        out.set("c_pq", num(c_pq(pair.m(), p, q)));
        out.set("mu", num(mu(pair.m(), p, q, cfg.mu_mode)));
    }
    let ch = sharpness::sharpness_characterization(&pair.a()?, &pair.b()?, cfg.n)?;
    out.set(
        "characterization",
        json!({
            "is_sharp": ch.is_sharp,
            "residual": num(ch.residual),
            "phase": num(ch.best_phase),
            "level": num(ch.level),
            "consistent_with_spectral": ch.consistent,
        }),
    );
    out.set("verdicts_agree", Value::Bool(ch.is_sharp == report.sharp));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    cfg: &RunConfig,
    family: Option<Family>,
    gamma: Option<&str>,
    l_list: &[f64],
    m_list: &[f64],
    p_list: &[f64],
    q_list: &[f64],
    params: &mut Map<String, Value>,
    out: &mut Output,
) -> Result<(), CliError> {
    let n = cfg.n;
    let text_err = |e: WirtingerError| Cell::Text(e.to_string());
    let table = if let Some(spec) = gamma {
        let g = weight_param(params, "gamma", spec)?;
        params.insert("p_list".into(), nums(p_list));
        params.insert("q_list".into(), nums(q_list));
        let points: Vec<(f64, f64)> = p_list
            .iter()
            .flat_map(|&p| q_list.iter().map(move |&q| (p, q)))
            .collect();
        let mut table = Table::new(&[
            "p",
            "q",
            "m",
            "bound",
            "computed",
            "relative_gap",
            "sharp",
            "error",
        ]);
        let rows: Vec<Vec<Cell>> = points
            .par_iter()
            .map(|&(p, q)| {
                let row = PowerWeightPair::new(&g, p, q)
                    .and_then(|pair| Ok((verify_sharpness(&pair, n)?, pair.m())));
                match row {
                    Ok((r, m)) => vec![
                        Cell::Num(p),
                        Cell::Num(q),
                        Cell::Num(m),
                        Cell::Num(r.bound),
                        Cell::Num(r.computed),
                        Cell::Num(r.relative_gap),
                        Cell::Bool(r.sharp),
                        Cell::Empty,
                    ],
                    Err(e) => {
                        let mut v = vec![Cell::Num(p), Cell::Num(q)];
                        v.extend((0..5).map(|_| Cell::Empty));
                        v.push(text_err(e));
                        v
                    }
                }
            })
            .collect();
        rows.into_iter().for_each(|r| table.push(r));
        table
    } else {
        match family.ok_or_else(|| missing("--family or --gamma"))? {
            Family::Ps => {
                params.insert("family".into(), Value::from("ps"));
                params.insert("l_list".into(), nums(l_list));
                let mut table = Table::new(&[
                    "l",
                    "lambda",
                    "bound",
                    "computed",
                    "relative_gap",
                    "sharp",
                    "error",
                ]);
                let rows: Vec<Vec<Cell>> = l_list
                    .par_iter()
                    .map(|&l| {
                        let row = sharpness::extremal_weight_ps(l).and_then(|a| {
                            let pair = PowerWeightPair::new(&a, 1.0, 1.0)?;
                            verify_sharpness(&pair, n)
                        });
                        match row {
                            Ok(r) => vec![
                                Cell::Num(l),
                                Cell::Num(lambda_ps(l)),
                                Cell::Num(r.bound),
                                Cell::Num(r.computed),
                                Cell::Num(r.relative_gap),
                                Cell::Bool(r.sharp),
                                Cell::Empty,
                            ],
                            Err(e) => {
                                let mut v = vec![Cell::Num(l)];
                                v.extend((0..5).map(|_| Cell::Empty));
                                v.push(text_err(e));
                                v
                            }
                        }
                    })
                    .collect();
                rows.into_iter().for_each(|r| table.push(r));
                table
            }
            Family::Pq => {
                params.insert("family".into(), Value::from("pq"));
                params.insert("m_list".into(), nums(m_list));
                params.insert("p_list".into(), nums(p_list));
                params.insert("q_list".into(), nums(q_list));
                let points: Vec<(f64, f64, f64)> = m_list
                    .iter()
                    .flat_map(|&m| {
                        p_list
                            .iter()
                            .flat_map(move |&p| q_list.iter().map(move |&q| (m, p, q)))
                    })
                    .collect();
                let mut table = Table::new(&[
                    "m",
                    "p",
                    "q",
                    "c_pq",
                    "mu",
                    "bound",
                    "computed",
                    "relative_gap",
                    "sharp",
                    "extremal_quotient",
                    "error",
                ]);
                let mode = cfg.mu_mode;
                let rows: Vec<Vec<Cell>> = points
                    .par_iter()
                    .map(|&(m, p, q)| {
                        let row = extremal_fn_pq(m, p, q, mode).and_then(|prof| {
                            let pair = PowerWeightPair::new(&prof.weight, p, q)?;
                            let r = verify_sharpness(&pair, n)?;
                            let rq = rayleigh_quotient(
                                &prof.a()?,
                                &prof.b()?,
                                TrialFunction::Closed(&prof.extremal_fn),
                            )?;
                            Ok((prof, r, rq.quotient))
                        });
                        match row {
                            Ok((prof, r, rq)) => vec![
                                Cell::Num(m),
                                Cell::Num(p),
                                Cell::Num(q),
                                Cell::Num(prof.c_pq.unwrap_or(f64::NAN)),
                                Cell::Num(prof.mu.unwrap_or(f64::NAN)),
                                Cell::Num(r.bound),
                                Cell::Num(r.computed),
                                Cell::Num(r.relative_gap),
                                Cell::Bool(r.sharp),
                                Cell::Num(rq),
                                Cell::Empty,
                            ],
                            Err(e) => {
                                let mut v = vec![Cell::Num(m), Cell::Num(p), Cell::Num(q)];
                                v.extend((0..7).map(|_| Cell::Empty));
                                v.push(text_err(e));
                                v
                            }
                        }
                    })
                    .collect();
                rows.into_iter().for_each(|r| table.push(r));
                table
            }
        }
    };
    out.set("row_count", Value::from(table.rows.len()));
    out.rows = Some(table);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_transform_check(
    cfg: &RunConfig,
    a: &str,
    b: &str,
    pq: Option<(f64, f64, f64)>,
    harmonic: f64,
    panels: usize,
    probes: usize,
    params: &mut Map<String, Value>,
    out: &mut Output,
) -> Result<(), CliError> {
    let (a, b) = (weight_param(params, "a", a)?, weight_param(params, "b", b)?);
    params.insert("harmonic".into(), num(harmonic));
    params.insert("panels".into(), Value::from(panels));
    params.insert("probes".into(), Value::from(probes));
    let cov = build_cov(&a, &b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<f64> = (0..probes.max(1))
        .map(|_| rng.gen_range(-TAU..2.0 * TAU))
        .collect();

    let roundtrip = points
        .iter()
        .map(|&t| (cov.inverse(cov.forward(t)) - t).abs())
        .fold(0.0, f64::max);
    let lift = points
        .iter()
        .map(|&t| (cov.forward(t + TAU) - cov.forward(t) - TAU).abs())
        .fold(0.0, f64::max);
    out.set("c", num(cov.c()));
    out.set("exact", Value::Bool(cov.is_exact()));
    out.set("roundtrip_error", num(roundtrip));
    out.set("lift_error", num(lift));
    let mut subs = Map::new();
    for w in [PeriodicFn::cos(harmonic), PeriodicFn::sin(harmonic)] {
        let r = cov.substitution_check(&w, panels, Rule::GaussLegendre4)?;
        subs.insert(
            w.label().to_string(),
            json!({"mass": num(r.mass), "constraint": num(r.constraint), "stiffness": num(r.stiffness)}),
        );
    }
    out.set("substitution", Value::Object(subs));

    if let Some((m, p, q)) = pq {
        params.insert("m".into(), num(m));
        params.insert("p".into(), num(p));
        params.insert("q".into(), num(q));
        let (h, hinv) = (h_pq(m, p, q)?, h_pq_inv(m, p, q)?);
        let h_round = points
            .iter()
            .map(|&x| {
                (h.eval(hinv.eval(x)) - x)
                    .abs()
                    .max((hinv.eval(h.eval(x)) - x).abs())
            })
            .fold(0.0, f64::max);
        let h_lift = points
            .iter()
            .map(|&x| {
                (h.eval(x + TAU) - h.eval(x) - TAU)
                    .abs()
                    .max((hinv.eval(x + TAU) - hinv.eval(x) - TAU).abs())
            })
            .fold(0.0, f64::max);
        let g = sharpness::extremal_weight_pq(m, p, q)?;
        let c_cov = build_cov(&g.power(p)?, &g.power(q)?)?.c();
        let c_formula = c_pq(m, p, q);
        out.set(
            "homeomorphism",
            json!({
                "roundtrip_error": num(h_round),
                "lift_error": num(h_lift),
                "c_pq": num(c_formula),
                "c_from_cov": num(c_cov),
                "c_error": num((c_cov - c_formula).abs()),
            }),
        );
    }
    Ok(())
}
