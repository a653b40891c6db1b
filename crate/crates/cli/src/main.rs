use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wirtinger::sharpness::MuMode;
use wirtinger_cli::{
    default_n, run, CliError, Command, Family, OutputFormat, RunConfig, DEFAULT_SAMPLES,
};

#[derive(Parser, Debug)]
#[command(
    name = "wirtinger",
    version,
    about = "Best constants in weighted Wirtinger inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of standard output; function dumps go to `<out>.fn.csv`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized probe grids.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Mesh size (defaults to $WIRTINGER_DEFAULT_N or 2048).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Exponent convention for μ in the (p, q) extremal functions.
    #[arg(long, global = true, value_enum, default_value_t = MuArg::ContinuityCorrected)]
    mu_mode: MuArg,
    /// Points per period in function dumps.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Record wall time in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MuArg {
    PaperLiteral,
    ContinuityCorrected,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Ps,
    Pq,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Ps => Family::Ps,
            FamilyArg::Pq => Family::Pq,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Closed-form upper bound for a general pair or a power-weight pair.
    Bound {
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long, conflicts_with_all = ["a", "b"])]
        gamma: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        p: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
    },
    /// Best constant from the first constrained eigenvalue.
    Solve {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Mesh sizes for a convergence study with extrapolation.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Extremal weight and function for one of the two families.
    Extremal {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        p: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
    },
    /// Compare the power-weight bound against the computed constant.
    Verify {
        #[arg(long)]
        gamma: String,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
    },
    /// Cartesian sweep, one report row per parameter point.
    Sweep {
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, conflicts_with = "family")]
        gamma: Option<String>,
        #[arg(long = "l-list", value_delimiter = ',')]
        l_list: Vec<f64>,
        #[arg(long = "m-list", value_delimiter = ',')]
        m_list: Vec<f64>,
        #[arg(long = "p-list", value_delimiter = ',', allow_negative_numbers = true)]
        p_list: Vec<f64>,
        #[arg(long = "q-list", value_delimiter = ',', allow_negative_numbers = true)]
        q_list: Vec<f64>,
    },
    /// Residuals of the change of variables and of the homeomorphisms h_{p,q}.
    TransformCheck {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Also check h_{p,q} for these `M,p,q`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        pq: Option<Vec<f64>>,
        /// Frequency of the cosine and sine test functions.
        #[arg(long, default_value_t = 1.0)]
        harmonic: f64,
        #[arg(long, default_value_t = 4096)]
        panels: usize,
        /// Random probe points for the round-trip checks.
        #[arg(long, default_value_t = 1000)]
        probes: usize,
    },
}

fn into_command(cmd: Cmd) -> Result<Command, CliError> {
    Ok(match cmd {
        Cmd::Bound { a, b, gamma, p, q } => Command::Bound { a, b, gamma, p, q },
        Cmd::Solve { a, b, n_list } => Command::Solve { a, b, n_list },
        Cmd::Extremal { family, l, m, p, q } => Command::Extremal {
            family: family.into(),
            l,
            m,
            p,
            q,
        },
        Cmd::Verify { gamma, p, q } => Command::Verify { gamma, p, q },
        Cmd::Sweep {
            family,
            gamma,
            l_list,
            m_list,
            p_list,
            q_list,
        } => Command::Sweep {
            family: family.map(Into::into),
            gamma,
            l_list,
            m_list,
            p_list,
            q_list,
        },
        Cmd::TransformCheck {
            a,
            b,
            pq,
            harmonic,
            panels,
            probes,
        } => Command::TransformCheck {
            a,
            b,
            pq: match pq.as_deref() {
                None => None,
                Some(&[m, p, q]) => Some((m, p, q)),
                Some(v) => {
                    return Err(CliError::Parse(format!(
                        "`--pq`: expected three values M,p,q, got {}",
                        v.len()
                    )))
                }
            },
            harmonic,
            panels,
            probes,
        },
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let cfg = RunConfig {
        command: into_command(cli.command)?,
        n: g.n.unwrap_or_else(default_n),
        mu_mode: match g.mu_mode {
            MuArg::PaperLiteral => MuMode::PaperLiteral,
            MuArg::ContinuityCorrected => MuMode::ContinuityCorrected,
        },
        format: match g.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        },
        samples: g.samples,
        seed: g.seed,
        timing: g.timing,
    };
    let report = run(&cfg)?;
    let body = match cfg.format {
        OutputFormat::Json => report.to_json_string(),
        OutputFormat::Csv => report.to_csv_string(),
    };
    match g.out {
        Some(path) => {
            let io = |p: &PathBuf, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            if let Some(dump) = &report.fn_dump {
                let mut fn_path = path.clone().into_os_string();
                fn_path.push(".fn.csv");
                let fn_path = PathBuf::from(fn_path);
                std::fs::write(&fn_path, dump.to_csv()).map_err(|e| io(&fn_path, e))?;
            }
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wirtinger: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
