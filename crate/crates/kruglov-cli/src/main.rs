//! Command-line front end: norm evaluation, transforms, bound sweeps,
//! operator-norm estimation, inequality checks, and the audit runner.
//!
//! Exit codes: 0 success, 1 numerical or check failure, 2 usage error.

mod audit;

use clap::{Args, Parser, Subcommand};
use kruglov_core::constants;
use kruglov_core::dist::DiscreteLaw;
use kruglov_core::harness::{rosenthal_check, Ensemble, TailNorm, DEFAULT_ATOM_BUDGET};
use kruglov_core::kruglov::{self, KruglovConfig};
use kruglov_core::spaces::SpaceSpec;
use kruglov_core::stepfn::StepFunction;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "kruglov",
    about = "Step-function calculus, transform bounds, and inequality audits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a space norm of a step function or of a law's quantile profile.
    Norm(NormArgs),
    /// Apply the transform to a law and report mass, deficit, and norms.
    Transform(TransformArgs),
    /// Sweep closed-form bounds over a p-grid (CSV or JSON).
    Bounds(BoundsArgs),
    /// Estimate the operator norm on a test family and report the bracket.
    Ratio(RatioArgs),
    /// Run one sum-vs-profile inequality check on an ensemble.
    Rosenthal(RosenthalArgs),
    /// Tail probabilities and extremal profile of the thinned binomial family.
    Extremal(ExtremalArgs),
    /// Run the full corpus plus a seeded random sweep; nonzero exit on failure.
    Audit(audit::AuditArgs),
}

#[derive(Args)]
struct NormArgs {
    /// Space, e.g. lp:2, lorentz:1.5, marc:4, orlicz:1, zx:lp:2,tail=discrete2
    #[arg(long)]
    space: String,
    /// Law literal: delta:V | indicator:U | sym:V,M | @file.json
    #[arg(long, conflicts_with = "step")]
    law: Option<String>,
    /// Step-function JSON file of [length, value] pairs
    #[arg(long)]
    step: Option<PathBuf>,
    /// Read truncation deficit at the largest value instead of at zero
    #[arg(long)]
    upper: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Law literal: delta:V | indicator:U | sym:V,M | @file.json
    #[arg(long)]
    law: String,
    /// Series truncation tolerance
    #[arg(long, default_value_t = 1e-12)]
    tail_tol: f64,
    /// Spaces to evaluate on the output (repeatable)
    #[arg(long)]
    space: Vec<String>,
    /// Write the transformed law JSON here
    #[arg(long)]
    emit_law: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Comma-separated p grid, e.g. 2,4,8,16,32,64
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    /// Input space
    #[arg(long)]
    input: String,
    /// Output space
    #[arg(long)]
    output_space: String,
    /// Indicator family size
    #[arg(long, default_value_t = 32)]
    family: usize,
    #[arg(long, default_value_t = 1e-12)]
    tail_tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RosenthalArgs {
    /// Ensemble JSON file (@ prefix optional)
    #[arg(long)]
    ensemble: String,
    /// Head space on [0,1]
    #[arg(long)]
    space: String,
    /// Tail norm: l1 | l2 | discrete2
    #[arg(long, default_value = "l1")]
    tail: String,
    /// Constant multiplying the right-hand side
    #[arg(long)]
    constant: f64,
    #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
    budget: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExtremalArgs {
    /// Number of summands
    #[arg(long)]
    n: u32,
    /// Total success mass in (0, 1]
    #[arg(long)]
    u: f64,
    /// Optional exponent for the l_q-profile values
    #[arg(long)]
    q: Option<f64>,
    /// Optional Marcinkiewicz exponent for the floor value (needs --q)
    #[arg(long)]
    p: Option<f64>,
    /// Also emit exact rational tails (small n)
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Norm(a) => cmd_norm(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Ratio(a) => cmd_ratio(a),
        Command::Rosenthal(a) => cmd_rosenthal(a),
        Command::Extremal(a) => cmd_extremal(a),
        Command::Audit(a) => return audit::cmd_audit(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

/// Parses `delta:V`, `indicator:U`, `sym:V,M`, or `@file.json`.
fn parse_law(text: &str) -> Result<DiscreteLaw, Box<dyn std::error::Error>> {
    if let Some(path) = text.strip_prefix('@') {
        let body = std::fs::read_to_string(path)?;
        return Ok(serde_json::from_str(&body)?);
    }
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| format!("bad law literal {text:?}; expected kind:args or @file"))?;
    let law = match kind {
        "delta" => DiscreteLaw::delta(rest.parse()?),
        "indicator" => DiscreteLaw::indicator_law(rest.parse()?)?,
        "sym" => {
            let (v, m) = rest
                .split_once(',')
                .ok_or_else(|| format!("sym needs value,mass, got {rest:?}"))?;
            DiscreteLaw::symmetric_pair(v.trim().parse()?, m.trim().parse()?)?
        }
        other => return Err(format!("unknown law kind {other:?}").into()),
    };
    Ok(law)
}

fn read_ensemble(text: &str) -> Result<Ensemble, Box<dyn std::error::Error>> {
    let path = text.strip_prefix('@').unwrap_or(text);
    let body = std::fs::read_to_string(path)?;
    let ens: Ensemble = serde_json::from_str(&body)?;
    Ensemble::new(ens.laws, ens.name).map_err(Into::into)
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> CliResult {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    emit_text(&body, output)
}

fn emit_text(body: &str, output: Option<&Path>) -> CliResult {
    match output {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_norm(a: NormArgs) -> CliResult {
    let space = SpaceSpec::from_str(&a.space)?;
    let (input, f) = match (&a.law, &a.step) {
        (Some(lit), None) => {
            let mut law = parse_law(lit)?;
            if a.upper {
                law = law.deficit_to_max();
            }
            (lit.clone(), law.quantile_step())
        }
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path)?;
            let step: StepFunction = serde_json::from_str(&body)?;
            (path.display().to_string(), step)
        }
        _ => return Err("provide exactly one of --law or --step".into()),
    };
    #[derive(Serialize)]
    struct NormReport {
        space: String,
        input: String,
        value: f64,
    }
    let report = NormReport {
        space: space.to_string(),
        input,
        value: space.norm(&f)?,
    };
    emit(&report, a.output.as_deref())
}

fn cmd_transform(a: TransformArgs) -> CliResult {
    let law = parse_law(&a.law)?;
    let cfg = KruglovConfig::from_tail_tol(a.tail_tol)?;
    let out = kruglov::transform(&law, &cfg)?;
    let mut norms = Vec::new();
    for stext in &a.space {
        let space = SpaceSpec::from_str(stext)?;
        norms.push((space.to_string(), space.norm_of_law(&out)?));
    }
    if let Some(path) = &a.emit_law {
        emit(&out, Some(path))?;
    }
    #[derive(Serialize)]
    struct TransformReport {
        input: String,
        tail_tol: f64,
        terms: usize,
        mass_at_zero: f64,
        deficit: f64,
        atom_count: usize,
        norms: Vec<(String, f64)>,
    }
    let report = TransformReport {
        input: a.law.clone(),
        tail_tol: a.tail_tol,
        terms: cfg.n_max(),
        mass_at_zero: out.mass_at(0.0),
        deficit: out.deficit(),
        atom_count: out.atoms().len(),
        norms,
    };
    emit(&report, a.output.as_deref())
}

#[derive(Serialize)]
struct BoundsRow {
    p: f64,
    lower: f64,
    upper: f64,
    lorentz_upper: f64,
    rate: f64,
    ratio_lower: f64,
    ratio_upper: f64,
    ratio_lorentz: f64,
}

fn bounds_row(p: f64) -> Result<BoundsRow, kruglov_core::Error> {
    let lower = constants::lower_bound_lp(p)?.value;
    let upper = constants::upper_bound_lp(p)?.value;
    let lorentz_upper = constants::lorentz_upper_bound(p)?.value;
    let rate = constants::reference_rate(p)?;
    Ok(BoundsRow {
        p,
        lower,
        upper,
        lorentz_upper,
        rate,
        ratio_lower: lower / rate,
        ratio_upper: upper / rate,
        ratio_lorentz: lorentz_upper / rate,
    })
}

fn cmd_bounds(a: BoundsArgs) -> CliResult {
    let rows = run_indexed(a.p.len(), worker_count(a.p.len()), |i| bounds_row(a.p[i]));
    let rows: Result<Vec<BoundsRow>, _> = rows.into_iter().collect();
    let rows = rows?;
    match a.format.as_str() {
        "json" => emit(&rows, a.output.as_deref()),
        "csv" => {
            let mut body = String::from("# bounds.v1\n");
            body.push_str("p,lower,upper,lorentz_upper,rate,ratio_lower,ratio_upper,ratio_lorentz\n");
            for r in &rows {
                body.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.p,
                    r.lower,
                    r.upper,
                    r.lorentz_upper,
                    r.rate,
                    r.ratio_lower,
                    r.ratio_upper,
                    r.ratio_lorentz
                ));
            }
            emit_text(&body, a.output.as_deref())
        }
        other => Err(format!("unknown format {other:?}; use csv or json").into()),
    }
}

fn cmd_ratio(a: RatioArgs) -> CliResult {
    let input = SpaceSpec::from_str(&a.input)?;
    let output_space = SpaceSpec::from_str(&a.output_space)?;
    let family = constants::indicator_family(a.family)?;
    let cfg = KruglovConfig::from_tail_tol(a.tail_tol)?;
    let report = constants::estimate_operator_norm(&input, &output_space, &family, &cfg)?;
    emit(&report, a.output.as_deref())
}

fn cmd_rosenthal(a: RosenthalArgs) -> CliResult {
    let ens = read_ensemble(&a.ensemble)?;
    let space = SpaceSpec::from_str(&a.space)?;
    let tail = match a.tail.as_str() {
        "l1" => TailNorm::L1,
        "l2" => TailNorm::L2,
        "discrete2" => TailNorm::Discrete2,
        other => return Err(format!("unknown tail {other:?}; use l1, l2, or discrete2").into()),
    };
    let report = rosenthal_check(&ens, &space, tail, a.constant, a.budget)?;
    emit(&report, a.output.as_deref())?;
    if report.pass {
        Ok(())
    } else {
        Err(format!("check failed with margin {}", report.margin).into())
    }
}

fn cmd_extremal(a: ExtremalArgs) -> CliResult {
    let out = constants::binomial_extremal(a.n, a.u)?;
    let lq_profile = match a.q {
        Some(q) => Some(constants::lq_profile(a.n, a.u, q)?.to_pairs()),
        None => None,
    };
    let marc_floor = match (a.q, a.p) {
        (Some(q), Some(p)) => Some(constants::extremal_marcinkiewicz_floor(a.n, a.u, p, q)?),
        _ => None,
    };
    let exact_tails = if a.exact {
        let u_rat = float_to_small_rational(a.u)
            .ok_or("exact mode needs u expressible with denominator up to 64")?;
        let tails = kruglov_core::exact::ExactLaw::binomial_tails(
            a.n,
            kruglov_core::exact::rat(u_rat.0, u_rat.1),
        )?;
        Some(tails.iter().map(|t| t.to_string()).collect())
    } else {
        None
    };
    #[derive(Serialize)]
    struct ExtremalReport {
        n: u32,
        u: f64,
        tails: Vec<f64>,
        profile: Vec<(f64, f64)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        lq_profile: Option<Vec<(f64, f64)>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        marc_floor: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        exact_tails: Option<Vec<String>>,
    }
    let report = ExtremalReport {
        n: a.n,
        u: a.u,
        tails: out.tails.clone(),
        profile: out.profile.to_pairs(),
        lq_profile,
        marc_floor,
        exact_tails,
    };
    emit(&report, a.output.as_deref())
}

/// Recovers `u` as a small fraction when its denominator divides 64.
fn float_to_small_rational(u: f64) -> Option<(i64, i64)> {
    for den in 1..=64_i64 {
        let num = u * den as f64;
        if (num - num.round()).abs() < 1e-12 && num.round() >= 1.0 {
            return Some((num.round() as i64, den));
        }
    }
    None
}

/// Worker count: `KRUGLOV_THREADS` if set and positive, else available
/// parallelism, capped by the job count.
pub(crate) fn worker_count(jobs: usize) -> usize {
    let configured = std::env::var("KRUGLOV_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    configured.min(jobs).max(1)
}

/// Runs `f` over `0..jobs` on up to `threads` workers; results come back
/// in index order, so output does not depend on the worker count.
pub(crate) fn run_indexed<T: Send>(
    jobs: usize,
    threads: usize,
    f: impl Fn(usize) -> T + Sync,
) -> Vec<T> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    if jobs == 0 {
        return Vec::new();
    }
    let slots: Vec<Mutex<Option<T>>> = (0..jobs).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(jobs) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let value = f(i);
                *slots[i].lock().unwrap() = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every job filled"))
        .collect()
}
