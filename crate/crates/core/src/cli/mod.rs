//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 numeric
//! failure, 4 domain violation, 5 I/O. Failures print one line on stderr:
//! `error kind=<Kind> exit=<code> message=<json string>`.

pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Complex, Rational};
use serde_json::{json, Value};

use crate::coefficients::{solve_coefficients, verify_interpolation, Residuals};
use crate::convergence::{dual_route_check, sweep, DEFAULT_N_LIST};
use crate::error::{Error, Result};
use crate::growth_space::{bnorm_estimate, GrowthFunction, SamplingGrid, DEFAULT_HORIZON};
use crate::nodes::{NodeScheme, NodeSet};
use crate::operator_engine::{discrepancy, limit_route_target, operator_route_fn, OperatorKind, N_START};
use crate::precision::{with_escalation, PrecisionPolicy};
use crate::scalar::{format_rational, parse_rational, QComplex};
use crate::superosc::MultivarProblem;

use config::{CoeffNum, Num, ProblemConfig};

pub const BITS_ENV: &str = "SUPEROSC_BITS";

#[derive(Parser, Debug)]
#[command(name = "superosc", version, about = "Superoscillations, supershifts and infinite-order operators")]
struct Cli {
    /// Working precision in bits (overrides the config and SUPEROSC_BITS).
    #[arg(long, global = true)]
    bits: Option<u32>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Interpolation coefficients Z_j(n, a) and their residuals.
    Coeffs(CoeffsArgs),
    /// Growth certificate and B-norm of a Taylor series.
    Certify(CertifyArgs),
    /// Evaluate F_n and its limit at one point.
    Eval(EvalArgs),
    /// Sup-error table over a grid for several orders.
    Sweep(SweepArgs),
    /// Evaluate through the infinite-order operator.
    Operator(OperatorArgs),
    /// Compare direct and operator evaluation on the grid.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[arg(long, default_value = "equispaced")]
    scheme: NodeScheme,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Comma-separated custom nodes.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// Highest residual power (default n + 1).
    #[arg(long)]
    p_max: Option<usize>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// JSON file `{"coeffs": [...]}` or `{"wave": λ}`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "B")]
    b: f64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Order (default: the configured one).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// `start:step:stop` or a comma list (default: config n_list, else 4:4:24).
    #[arg(long)]
    n: Option<String>,
    /// `default` (config grid) or `refined` (2p − 1 points per axis).
    #[arg(long, default_value = "default")]
    grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Also run the operator route at every order.
    #[arg(long)]
    dual_route: bool,
}

#[derive(Args, Debug)]
struct OperatorArgs {
    #[arg(long)]
    kind: OperatorKind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Symbol order; `auto` grows it until the truncation bound is met.
    #[arg(long = "N", default_value = "auto")]
    order: String,
    #[arg(long, default_value = "json")]
    report: String,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: Option<usize>,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli).and_then(|(out, code)| emit(cli.out.as_deref(), &out).map(|_| code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error kind={} exit={} message={}", e.kind(), e.exit_code(), Value::String(e.to_string()));
            e.exit_code()
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(String, i32)> {
    let bits = bits_override(cli.bits)?;
    match &cli.command {
        Command::Coeffs(a) => coeffs(a).map(|v| (pretty(&v), 0)),
        Command::Certify(a) => certify(a).map(|v| (pretty(&v), 0)),
        Command::Eval(a) => eval(a, bits).map(|v| (pretty(&v), 0)),
        Command::Sweep(a) => sweep_cmd(a, bits).map(|s| (s, 0)),
        Command::Operator(a) => operator(a, bits).map(|v| (pretty(&v), 0)),
        Command::Check(a) => check(a, bits),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn bits_override(flag: Option<u32>) -> Result<Option<u32>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(BITS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u32>()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("{BITS_ENV}='{v}' is not an integer"))),
        Err(_) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path, bits: Option<u32>) -> Result<(ProblemConfig, PrecisionPolicy)> {
    let cfg = ProblemConfig::from_json(&read(path)?)?;
    let mut policy = cfg.policy()?;
    if let Some(b) = bits {
        policy = policy.with_bits(b)?;
    }
    Ok((cfg, policy))
}

fn parse_point(s: &str) -> Result<Vec<Rational>> {
    s.split(',').map(parse_rational).collect()
}

fn complex_json(z: &Complex) -> Value {
    json!({ "re": z.real().to_f64(), "im": z.imag().to_f64() })
}

fn q_json(z: &QComplex) -> Value {
    if z.im.is_zero() {
        Value::String(format_rational(&z.re))
    } else {
        json!({ "re": format_rational(&z.re), "im": format_rational(&z.im) })
    }
}

fn coeffs(a: &CoeffsArgs) -> Result<Value> {
    let target = parse_rational(&a.a)?;
    let nodes = match (&a.points, a.scheme) {
        (Some(p), _) => NodeSet::custom(parse_point(p)?)?,
        (None, NodeScheme::Custom) => return Err(Error::InvalidInput("--scheme custom needs --points".into())),
        (None, s) => {
            let n = a.n.ok_or_else(|| Error::InvalidInput("--n is required".into()))?;
            crate::nodes::generate_nodes(s, n)?
        }
    };
    let c = solve_coefficients(&nodes, &target);
    let n = c.order();
    let p_max = a.p_max.unwrap_or(n);
    let residuals = verify_interpolation(&c, p_max);
    let z: Vec<Value> = match c.exact_values() {
        Some(v) => v.iter().map(|r| Value::String(format_rational(r))).collect(),
        None => {
            let bits = PrecisionPolicy::for_order(n).bits;
            c.values_at(bits).iter().map(|f| Value::String(f.to_string_radix(10, Some(40)))).collect()
        }
    };
    let res: Vec<Value> = match &residuals {
        Residuals::Exact(v) => v.iter().map(|r| Value::String(format_rational(r))).collect(),
        Residuals::Approx { values, .. } => values.iter().map(|v| json!(v)).collect(),
    };
    let nodes_json: Vec<Value> = nodes
        .points()
        .iter()
        .map(|p| match p.exact() {
            Some(r) => Value::String(format_rational(r)),
            None => json!(p.to_f64()),
        })
        .collect();
    Ok(json!({
        "n": n,
        "a": format_rational(&target),
        "scheme": nodes.scheme().to_string(),
        "nodes": nodes_json,
        "Z": z,
        "exact": c.is_exact(),
        "residuals": res,
        "max_abs_Z": c.max_magnitude(),
        "sum_abs_Z": c.abs_sum(),
    }))
}

fn certify(a: &CertifyArgs) -> Result<Value> {
    let text = read(&a.input)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("taylor JSON: {e}")))?;
    let f = if let Some(w) = v.get("wave") {
        let l: Num = serde_json::from_value(w.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        GrowthFunction::wave(l.0)
    } else if let Some(c) = v.get("coeffs") {
        let list: Vec<CoeffNum> = serde_json::from_value(c.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let q: Vec<QComplex> = list
            .iter()
            .map(|c| match c {
                CoeffNum::Real(r) => QComplex::real(r.0.clone()),
                CoeffNum::Complex { re, im } => QComplex::new(re.0.clone(), im.0.clone()),
            })
            .collect();
        if q.is_empty() {
            return Err(Error::InvalidInput("empty coefficient list".into()));
        }
        GrowthFunction::from_exact(q, a.horizon, "input")?
    } else {
        return Err(Error::InvalidInput("taylor JSON needs 'coeffs' or 'wave'".into()));
    };
    let cert = f.certificate();
    let est = bnorm_estimate(&f, a.b, &SamplingGrid::default())?;
    Ok(json!({
        "C": cert.c,
        "b": cert.b,
        "B": a.b,
        "bnorm_lower": est.lower,
        "bnorm_upper": est.upper,
        "cap_radius": est.cap,
        "samples": est.samples,
    }))
}

fn eval(a: &EvalArgs, bits: Option<u32>) -> Result<Value> {
    let (cfg, policy) = load(&a.config, bits)?;
    let problem = cfg.problem(a.n)?;
    let x = parse_point(&a.x)?;
    problem.check_point(&x)?;
    let policy = policy.at_least_for_order(problem.order());
    let esc = with_escalation(&policy, |b| {
        let p = problem.prepare(b)?;
        let f = p.eval(&x)?;
        let t = p.target(&x)?;
        Ok(vec![f.value, t.value])
    })?;
    let (f, t) = (&esc.value[0], &esc.value[1]);
    let err = crate::scalar::abs_f64(&Complex::with_val(esc.bits, f - t));
    let tail = problem.eval(&x, esc.bits)?.tail_bound;
    let mut out = json!({
        "n": problem.order(),
        "x": x.iter().map(format_rational).collect::<Vec<_>>(),
        "value": complex_json(f),
        "target": complex_json(t),
        "error": err,
        "tail_bound": tail,
        "bits": esc.bits,
        "precision_discrepancy": esc.error_estimate,
    });
    if let (Some(v), Some(tv)) = (problem.eval_exact(&x), problem.target_exact(&x)) {
        out["exact_value"] = q_json(&v);
        out["exact_target"] = q_json(&tv);
    }
    Ok(out)
}

fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidInput(format!("cannot parse n list '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<usize> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        if v[1] == 0 {
            return Err(bad());
        }
        return Ok((v[0]..=v[2]).step_by(v[1]).collect());
    }
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn sweep_cmd(a: &SweepArgs, bits: Option<u32>) -> Result<String> {
    let (cfg, policy) = load(&a.config, bits)?;
    cfg.validate()?;
    let n_list = match &a.n {
        Some(s) => parse_n_list(s)?,
        None => cfg.n_list.clone().unwrap_or_else(|| DEFAULT_N_LIST.to_vec()),
    };
    let grid = match a.grid.as_str() {
        "default" => cfg.grid_spec()?,
        "refined" => cfg.grid_spec()?.refined(),
        other => return Err(Error::InvalidInput(format!("unknown grid '{other}' (default|refined)"))),
    };
    let mut report = sweep(&cfg.family()?, &n_list, &grid, &policy, a.dual_route)?;
    report.metadata.config_hash = Some(cfg.hash());
    Ok(match a.format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    })
}

fn operator(a: &OperatorArgs, bits: Option<u32>) -> Result<Value> {
    if a.report != "json" {
        return Err(Error::InvalidInput(format!("unsupported report format '{}'", a.report)));
    }
    let (cfg, policy) = load(&a.config, bits)?;
    let problem = cfg.problem(a.n)?;
    if OperatorKind::for_mode(problem.mode()) != a.kind {
        return Err(Error::InvalidConfig(format!("operator {} does not match {} mode", a.kind, problem.mode())));
    }
    let x = parse_point(&a.x)?;
    let bits = policy.at_least_for_order(problem.order()).bits;
    let (route, order) = match a.order.as_str() {
        "auto" => (operator_route_fn(&problem, &x, bits)?, None),
        n => {
            let n: usize = n.parse().map_err(|_| Error::InvalidInput(format!("--N must be 'auto' or an integer, got '{n}'")))?;
            (fixed_order_route(&problem, &x, n, bits)?, Some(n))
        }
    };
    let direct = problem.eval(&x, bits)?;
    let limit = limit_route_target(&problem, &x, bits)?;
    Ok(json!({
        "kind": a.kind.to_string(),
        "n": problem.order(),
        "x": x.iter().map(format_rational).collect::<Vec<_>>(),
        "N": order.map_or_else(|| Value::String("auto".into()), |n| json!(n)),
        "value": complex_json(&route.value),
        "tail_bound": route.tail_bound,
        "direct_value": complex_json(&direct.value),
        "direct_tail_bound": direct.tail_bound,
        "dual_route_discrepancy": discrepancy(&route, &direct),
        "limit_value": complex_json(&limit.value),
        "bits": bits,
    }))
}

fn fixed_order_route(problem: &MultivarProblem, x: &[Rational], n: usize, bits: u32) -> Result<crate::superosc::Evaluation> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("--N must be at least 1 (auto starts at {N_START})")));
    }
    problem.check_point(x)?;
    let kind = OperatorKind::for_mode(problem.mode());
    let op = crate::operator_engine::build_symbol(kind, x, problem.g(), n, bits + 32)?;
    let f = GrowthFunction::superposition(problem.coeffs());
    let applied = crate::operator_engine::apply_operator(&op, &f, 0)?;
    Ok(crate::superosc::Evaluation {
        value: Complex::with_val(bits, applied.value_at_zero(bits + 32)),
        tail_bound: applied.tail_bound,
    })
}

fn check(a: &CheckArgs, bits: Option<u32>) -> Result<(String, i32)> {
    let (cfg, policy) = load(&a.config, bits)?;
    let problem = cfg.problem(a.n)?;
    let grid = cfg.grid_spec()?;
    let report = dual_route_check(&problem, &grid, &policy)?;
    let code = if report.within_bounds { 0 } else { 3 };
    let mut v = serde_json::to_value(&report).expect("json");
    v["config_hash"] = Value::String(cfg.hash());
    Ok((pretty(&v), code))
}
