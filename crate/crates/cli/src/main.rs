//! `ggbm`: command-line front end for ggbm-core.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage, domain or
//! I/O error.

mod format;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ggbm_core::fbm::generate_fbm;
use ggbm_core::ggbm::{fdd_charfun, fdd_density, ggbm_path_product, ggbm_path_subordinated, marginal_density};
use ggbm_core::green::TestFunction;
use ggbm_core::montecarlo::{estimate_potential_mc, with_thread_cap, PerpetualSpec, TimeGridSpec};
use ggbm_core::randvar::sample_y_beta_n;
use ggbm_core::specfun::{green_constant, m_wright, mittag_leffler};
use ggbm_core::verify::{run_suite, Relation, Report, Suite, VerifyConfig};
use ggbm_core::{GridSpec, ModelParams, SeedSpec};

use crate::format::fmt_sig15;

#[derive(Parser)]
#[command(name = "ggbm", version, about = "Generalized grey Brownian motion: evaluation, sampling, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a special function, constant or density.
    Eval(EvalArgs),
    /// Draw samples or paths and write them as CSV (or JSON).
    Sample(SampleArgs),
    /// Run a validation suite and print a JSON report.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of the Green potential of a test function.
    EstimatePotential(EstimateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFunction {
    /// Mittag-Leffler function E_beta(z), z <= 0.
    Ml,
    /// M-Wright density M_beta(tau).
    Mwright,
    /// Green constant D(beta, alpha, d).
    GreenConstant,
    /// Density of (B(t_1), ..., B(t_n)) at --point.
    Density,
    /// Characteristic function of (B(t_1), ..., B(t_n)) at --point.
    Charfun,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Master seed; falls back to GGBM_DEFAULT_SEED, then 42.
    #[arg(long, env = "GGBM_DEFAULT_SEED", default_value_t = 42)]
    seed: u64,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Cap on worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(value_enum)]
    function: EvalFunction,
    #[command(flatten)]
    common: Common,
    /// Argument of the Mittag-Leffler function.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
    /// Argument of the M-Wright density.
    #[arg(long)]
    tau: Option<f64>,
    /// Comma-separated times t_1 < ... < t_n.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    times: Vec<f64>,
    /// Comma-separated n*d coordinates, time-major.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleWhat {
    Ybeta,
    Fbm,
    Ggbm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Representation {
    Product,
    Subordinated,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(value_enum)]
    what: SampleWhat,
    #[command(flatten)]
    common: Common,
    /// Number of Y_beta draws.
    #[arg(short = 'n', default_value_t = 1)]
    n: usize,
    /// Hurst index for fbm.
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long, default_value_t = 1024)]
    steps: usize,
    #[arg(long = "t-max", default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, value_enum, default_value_t = Representation::Product)]
    representation: Representation,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_parser = parse_suite)]
    suite: Suite,
    #[command(flatten)]
    common: Common,
    /// Paths (or samples) per parameter set.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long = "t-max", default_value_t = 50.0)]
    t_max: f64,
    /// Uniform time grid with this many steps (default: geometric + uniform grid).
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionKind {
    Gaussian,
    Bump,
    Ball,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long = "t-max", default_value_t = 50.0)]
    t_max: f64,
    #[arg(long)]
    steps: Option<usize>,
    /// Starting point, comma-separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, value_enum, default_value_t = FunctionKind::Gaussian)]
    function: FunctionKind,
    /// Width of the test function: sigma or radius.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    /// Centre of the test function, comma-separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Vec<f64>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

/// Failure modes mapped to exit codes.
enum Failure {
    Usage(String),
    Checks,
}

impl From<ggbm_core::Error> for Failure {
    fn from(e: ggbm_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

type CliResult = Result<(), Failure>;

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn params(c: &Common, default_dim: usize) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(
        need(c.beta, "beta")?,
        need(c.alpha, "alpha")?,
        c.dim.unwrap_or(default_dim),
    )?)
}

fn emit(c: &Common, text: &str) -> CliResult {
    match &c.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn grid_spec(steps: Option<usize>) -> TimeGridSpec {
    match steps {
        Some(n_steps) => TimeGridSpec::Uniform { n_steps },
        None => TimeGridSpec::default(),
    }
}

fn eval(a: &EvalArgs) -> CliResult {
    let c = &a.common;
    let (value, extra) = match a.function {
        EvalFunction::Ml => {
            let r = mittag_leffler(need(c.beta, "beta")?, need(a.z, "z")?)?;
            (r.value, Some(r.est_abs_error))
        }
        EvalFunction::Mwright => {
            let r = m_wright(need(c.beta, "beta")?, need(a.tau, "tau")?)?;
            (r.value, Some(r.est_abs_error))
        }
        EvalFunction::GreenConstant => (green_constant(&params(c, 3)?)?, None),
        EvalFunction::Density | EvalFunction::Charfun => {
            let p = params(c, 1)?;
            let point = if a.point.is_empty() {
                vec![0.0; a.times.len() * p.d]
            } else {
                a.point.clone()
            };
            let v = match a.function {
                EvalFunction::Density if a.times.len() == 1 => marginal_density(&p, &point, a.times[0])?,
                EvalFunction::Density => fdd_density(&p, &a.times, &point)?,
                _ => fdd_charfun(&p, &a.times, &point)?,
            };
            (v, None)
        }
    };
    let text = if c.format == Some(Format::Json) {
        let mut obj = json!({ "function": a.function.to_possible_value().unwrap().get_name(), "value": value });
        if let Some(e) = extra {
            obj["est_abs_error"] = json!(e);
        }
        format!("{obj}\n")
    } else {
        format!("{}\n", fmt_sig15(value))
    };
    emit(c, &text)
}

fn sample(a: &SampleArgs) -> CliResult {
    let c = &a.common;
    let json_out = c.format == Some(Format::Json);
    let text = match a.what {
        SampleWhat::Ybeta => {
            let beta = need(c.beta, "beta")?;
            let ys = sample_y_beta_n(beta, a.n, SeedSpec::new(c.seed, 0))?;
            if json_out {
                format!("{}\n", json!({ "beta": beta, "seed": c.seed, "values": ys }))
            } else {
                ys.iter().map(|y| format!("{y}\n")).collect()
            }
        }
        SampleWhat::Fbm | SampleWhat::Ggbm => {
            let grid = GridSpec::new(a.t_max, a.steps)?;
            let seed = SeedSpec::new(c.seed, 0);
            let path = match a.what {
                SampleWhat::Fbm => generate_fbm(need(a.hurst, "hurst")?, grid, c.dim.unwrap_or(1), seed)?,
                _ => {
                    let p = params(c, 1)?;
                    match a.representation {
                        Representation::Product => ggbm_path_product(&p, grid, seed)?,
                        Representation::Subordinated => ggbm_path_subordinated(&p, grid, seed)?,
                    }
                }
            };
            if json_out {
                let rows: Vec<&[f64]> = (0..path.len()).map(|k| path.point(k)).collect();
                format!(
                    "{}\n",
                    json!({ "t": grid.times(), "values": rows, "hurst": path.hurst, "seed": c.seed })
                )
            } else {
                path.to_csv()
            }
        }
    };
    emit(c, &text)
}

fn report_csv(r: &Report) -> String {
    let mut s = String::from("suite,name,expected,observed,tolerance,relation,pass\n");
    for ch in &r.checks {
        let rel = match ch.relation {
            Relation::Within => "within",
            Relation::AtLeast => "at_least",
            Relation::AtMost => "at_most",
        };
        s.push_str(&format!(
            "{},\"{}\",{:e},{:e},{:e},{rel},{}\n",
            r.suite, ch.name, ch.expected, ch.observed, ch.tolerance, ch.pass
        ));
    }
    s
}

fn verify(a: &VerifyArgs) -> CliResult {
    let c = &a.common;
    let beta_alpha = match (c.beta, c.alpha) {
        (Some(b), Some(al)) => Some((b, al)),
        (None, None) => None,
        (Some(b), None) if a.suite == Suite::Specfun => Some((b, 1.0)),
        _ => return Err(Failure::Usage("--beta and --alpha must be given together".into())),
    };
    if let Some((b, al)) = beta_alpha {
        ModelParams::new(b, al, c.dim.unwrap_or(1))?;
    }
    let cfg = VerifyConfig {
        beta_alpha,
        dim: c.dim,
        n_paths: a.paths,
        seed: c.seed,
        t_max: a.t_max,
        grid: grid_spec(a.steps),
    };
    let report = with_thread_cap(c.threads, || run_suite(a.suite, &cfg))??;
    let text = if c.format == Some(Format::Csv) {
        report_csv(&report)
    } else {
        format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable"))
    };
    emit(c, &text)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn estimate(a: &EstimateArgs) -> CliResult {
    let c = &a.common;
    let p = params(c, 3)?;
    let point = |v: &[f64], flag: &str| -> Result<Vec<f64>, Failure> {
        match v.len() {
            0 => Ok(vec![0.0; p.d]),
            n if n == p.d => Ok(v.to_vec()),
            n => Err(Failure::Usage(format!("--{flag} has {n} coordinates but dim = {}", p.d))),
        }
    };
    let x = point(&a.x, "x")?;
    let center = point(&a.center, "center")?;
    let f = match a.function {
        FunctionKind::Gaussian => TestFunction::gaussian(center, a.width)?,
        FunctionKind::Bump => TestFunction::bump(center, a.width)?,
        FunctionKind::Ball => TestFunction::indicator_ball(center, a.width)?,
    };
    let spec = PerpetualSpec::new(a.t_max, grid_spec(a.steps), a.paths, c.seed)?;
    let est = with_thread_cap(c.threads, || estimate_potential_mc(&p, &f, &x, &spec))??;
    if c.format == Some(Format::Csv) {
        return Err(Failure::Usage("estimate-potential writes JSON only".into()));
    }
    emit(c, &format!("{}\n", serde_json::to_string_pretty(&est).expect("serializable")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => eval(a),
        Command::Sample(a) => sample(a),
        Command::Verify(a) => verify(a),
        Command::EstimatePotential(a) => estimate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
