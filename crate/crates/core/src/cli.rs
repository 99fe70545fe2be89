//! The `qkflow` command line.
//!
//! JSON results go to `--out` when given, otherwise to stdout; `flow` writes
//! its CSV trace to `--out` and the summary to stdout. Exit codes: 0 success,
//! 1 a check failed, 2 bad input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::json::JsonScalar;
use crate::exterior::Form;
use crate::flow::{self, SolitonData};
use crate::scalar::{parse_rational, Rational};
use crate::scenarios;
use crate::structures::{metric_from_form, StructureKind};
use crate::verify::{Config, Tolerances, Verifier, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "qkflow", version, about = "Quaternion-Kähler and Spin(7) structures: torsion, harmonic flow, checks")]
pub struct Cli {
    /// Output file (JSON results; the CSV trace for `flow`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Tolerance profile: default, strict or loose.
    #[arg(long, global = true, default_value = "default")]
    pub tol_profile: String,
    /// Exact rational arithmetic where available.
    #[arg(long, global = true)]
    pub exact: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a verification suite (exterior, structures, scenarios, geometry, flow, acceptance) or all.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Split a 2- or 4-form (JSON file) into its irreducible components.
    Decompose(FormArgs),
    /// Intrinsic torsion, its divergence and energy density of a scenario.
    Torsion(TorsionArgs),
    /// Integrate the harmonic flow on a homogeneous ansatz.
    Flow(FlowArgs),
    /// Evaluate the soliton equations on a scenario.
    SolitonCheck(SolitonArgs),
    /// Recover the metric of a structure 4-form (JSON file).
    Metric(FormArgs),
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Qk,
    Spin7,
}

impl From<KindArg> for StructureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Qk => StructureKind::QK,
            KindArg::Spin7 => StructureKind::Spin7,
        }
    }
}

#[derive(Args, Debug)]
pub struct FormArgs {
    /// Path to a form in JSON (`{"degree": k, "entries": [{"idx": [..], "re": ..}]}`).
    pub form: PathBuf,
    #[arg(long, value_enum, default_value = "qk")]
    pub kind: KindArg,
}

#[derive(Args, Debug)]
pub struct TorsionArgs {
    /// Built-in scenario name or scenario file.
    pub scenario: String,
    /// Parameter values, comma separated (defaults from the scenario).
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Coordinate point, comma separated; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Vec<String>,
    /// Number of random points when no --point is given (inhomogeneous scenarios).
    #[arg(long, default_value_t = 1)]
    pub random: usize,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    /// Flow family (hh2, su3) or any homogeneous scenario.
    #[arg(long, default_value = "su3")]
    pub scenario: String,
    /// Initial parameters, comma separated (family default otherwise).
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<String>,
    /// Final time (default: 5/C for families).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time step (default: 0.01/C for families).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Also rerun with dt/2 and report the error ratio against the closed form.
    #[arg(long)]
    pub check_order: bool,
}

#[derive(Args, Debug)]
pub struct SolitonArgs {
    #[arg(long, default_value = "euclid_soliton")]
    pub scenario: String,
    /// Candidate soliton: `steady` (X = ∂₁, potential x₁) or `zero`.
    #[arg(long, default_value = "steady")]
    pub soliton: String,
    /// Number of random points.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

/// Parses the process arguments and runs.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let tol = Tolerances::profile(&cli.tol_profile)?;
    let cfg = Config { seed: cli.seed, tol, exact: cli.exact };
    match &cli.command {
        Command::Verify { suite } => {
            let report = Verifier::new(cfg).run(Some(suite))?;
            for c in &report.checks {
                eprintln!("{}", c.line());
            }
            eprintln!("{} checks, {} failed", report.checks.len(), report.failures());
            emit(cli.out.as_deref(), &report.to_json_string())?;
            Ok(report.all_passed())
        }
        Command::Decompose(a) => {
            let v = if cli.exact { decompose::<Rational>(a)? } else { decompose::<f64>(a)? };
            emit_json(cli.out.as_deref(), &v)?;
            Ok(true)
        }
        Command::Metric(a) => {
            let form = Form::<f64>::from_json_str(&read(&a.form)?)?;
            let g = metric_from_form(&form, a.kind.into())?;
            let m = g.matrix();
            let rows: Vec<Vec<f64>> = (0..8).map(|i| (0..8).map(|j| m[(i, j)]).collect()).collect();
            emit_json(cli.out.as_deref(), &json!({ "kind": StructureKind::from(a.kind).name(), "metric": rows }))?;
            Ok(true)
        }
        Command::Torsion(a) => {
            let v = torsion(a, &cfg)?;
            emit_json(cli.out.as_deref(), &v)?;
            Ok(true)
        }
        Command::Flow(a) => run_flow(a, &cfg, cli.out.as_deref()),
        Command::SolitonCheck(a) => {
            let s = scenarios::resolve(&a.scenario)?.prepared()?;
            let sol = match a.soliton.as_str() {
                "steady" => SolitonData::euclid_steady(),
                "zero" => SolitonData::zero(),
                other => return Err(Error::InvalidArgument(format!("unknown soliton '{other}' (valid: steady, zero)"))),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let points: Vec<Vec<f64>> = (0..a.points.max(1))
                .map(|_| {
                    let mut p = s.sample_coords(&mut rng);
                    p.extend(s.default_params());
                    p
                })
                .collect();
            let r = flow::soliton_residual(&s, &sol, &points)?;
            let ok = r.gradient.is_none_or(|g| g <= cfg.tol.algebraic) && r.lie <= cfg.tol.differential;
            emit_json(cli.out.as_deref(), &json!({ "scenario": s.name, "passed": ok, "residual": r }))?;
            Ok(ok)
        }
        Command::ListScenarios => {
            let mut out = String::new();
            for (name, description) in scenarios::list() {
                let s = scenarios::builtin(name)?;
                let params: Vec<String> = s.parameters.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
                out += &format!("{name:<16} {:<6} coords [{}] params [{}]  {description}\n", s.kind.name(), s.active_coords.join(", "), params.join(", "));
            }
            emit(cli.out.as_deref(), out.trim_end())?;
            Ok(true)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => match writeln!(std::io::stdout(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(v)?)
}

fn form_value<S: JsonScalar>(f: &Form<S>) -> Value {
    serde_json::to_value(f.to_json()).expect("form JSON")
}

fn decompose<S: JsonScalar>(a: &FormArgs) -> Result<Value> {
    let form = Form::<S>::from_json_str(&read(&a.form)?)?;
    let kind: StructureKind = a.kind.into();
    let s = kind.standard();
    let pieces: Vec<(String, Form<S>)> = match form.degree() {
        2 => s.lambda2_classify(&form)?,
        4 => s.lambda4_classify(&form)?.into_iter().map(|(l, f)| (l.to_string(), f)).collect(),
        d => return Err(Error::InvalidArgument(format!("decompose takes a 2- or 4-form, got degree {d}"))),
    };
    let total = pieces.iter().fold(Form::zero(form.degree()), |acc, (_, p)| acc + p.clone());
    let pieces: Vec<Value> = pieces
        .iter()
        .map(|(label, p)| json!({ "label": label, "norm": p.norm(), "form": form_value(p) }))
        .collect();
    Ok(json!({
        "kind": kind.name(),
        "degree": form.degree(),
        "pieces": pieces,
        "reconstruction_residual": (total - form).norm(),
    }))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .or_else(|| parse_rational(t).and_then(|q| num_traits::ToPrimitive::to_f64(&q)))
                .ok_or_else(|| Error::InvalidArgument(format!("not a number: '{t}'")))
        })
        .collect()
}

fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_rational(t.trim()).ok_or_else(|| Error::InvalidArgument(format!("not a rational: '{t}'"))))
        .collect()
}

fn torsion(a: &TorsionArgs, cfg: &Config) -> Result<Value> {
    let s = scenarios::resolve(&a.scenario)?.prepared()?;
    if cfg.exact {
        if !s.is_homogeneous() {
            return Err(Error::InvalidArgument("--exact needs a homogeneous scenario (no active coordinates)".into()));
        }
        let params = match &a.params {
            Some(p) => parse_rational_list(p)?,
            None => s.default_params().iter().map(|&x| Rational::from_float(x).expect("finite default")).collect(),
        };
        let g = s.geometry::<Rational>(&params)?;
        let torsion: Vec<Value> = g.torsion().iter().map(form_value).collect();
        let e = g.energy_density();
        return Ok(json!({
            "scenario": s.name,
            "exact": true,
            "points": [{
                "values": params.iter().map(crate::scalar::rational_to_string).collect::<Vec<_>>(),
                "torsion": torsion,
                "divergence": form_value(&g.divergence()),
                "energy_density": crate::scalar::rational_to_string(&e),
            }]
        }));
    }
    let params = match &a.params {
        Some(p) => parse_list(p)?,
        None => s.default_params(),
    };
    if params.len() != s.n_params() {
        return Err(Error::InvalidArgument(format!("scenario '{}' has {} parameters, got {}", s.name, s.n_params(), params.len())));
    }
    let coords: Vec<Vec<f64>> = if s.is_homogeneous() {
        vec![vec![]]
    } else if !a.point.is_empty() {
        a.point.iter().map(|p| parse_list(p)).collect::<Result<_>>()?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..a.random.max(1)).map(|_| s.sample_coords(&mut rng)).collect()
    };
    let mut points = Vec::new();
    for c in coords {
        let point: Vec<f64> = c.iter().chain(&params).copied().collect();
        let g = s.geometry_jet(&point, false)?;
        let vals = |f: &Form<crate::jet::Jet>| f.map(|j| j.value);
        let torsion: Vec<Value> = g.torsion().iter().map(|t| form_value(&vals(t))).collect();
        points.push(json!({
            "values": point,
            "torsion": torsion,
            "divergence": form_value(&vals(&g.divergence())),
            "energy_density": g.energy_density().value,
            "div_norm2": g.div_norm2().value,
        }));
    }
    Ok(json!({ "scenario": s.name, "variables": s.variables(), "exact": false, "points": points }))
}

fn run_flow(a: &FlowArgs, cfg: &Config, out: Option<&Path>) -> Result<bool> {
    let family = flow::family(&a.scenario).ok();
    let s = match &family {
        Some(f) => f.scenario.clone(),
        None => scenarios::resolve(&a.scenario)?.prepared()?,
    };
    if !s.is_homogeneous() {
        return Err(Error::InvalidArgument(format!("scenario '{}' is not homogeneous; the flow needs a parameter ansatz", s.name)));
    }
    let p0 = match (&a.p0, &family) {
        (Some(p), _) => parse_list(p)?,
        (None, Some(f)) => vec![f.p_start],
        (None, None) => s.default_params(),
    };
    let rate = match &family {
        Some(f) => Some(f.initial_rate(p0[0])?),
        None => None,
    };
    let t_end = a.t_end.or(rate.map(|c| 5.0 / c)).unwrap_or(1.0);
    let dt = a.dt.or(rate.map(|c| 0.01 / c)).unwrap_or(t_end / 500.0);
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidArgument("--dt and --t-end must be positive".into()));
    }
    let trace = flow::integrate(&s, &[], &p0, t_end, dt, 1e-6)?;
    if let Some(p) = out {
        trace.write_csv(std::fs::File::create(p)?)?;
    }
    let last = trace.last();
    let mut summary = json!({
        "scenario": s.name,
        "p0": p0,
        "t_end": t_end,
        "dt": dt,
        "steps": trace.states.len() - 1,
        "aborted": trace.aborted,
        "final": { "t": last.t, "p": last.p, "energy_density": last.energy_density, "div_norm2": last.div_norm2 },
    });
    let mut ok = trace.aborted.is_none();
    if let (Some(f), Some(c0)) = (&family, rate) {
        let fit = flow::fit_rate(f, &trace, c0)?;
        summary["observable"] = json!(f.observable_name);
        summary["profile"] = json!(f.profile_name);
        summary["fitted_rate"] = json!(fit.rate);
        summary["max_deviation"] = json!(fit.max_deviation);
        summary["printed_rate"] = json!(f.paper_rate);
        summary["rate_over_printed"] = json!(fit.rate / f.paper_rate);
        ok &= fit.max_deviation <= cfg.tol.ode;
        if a.check_order {
            let err = |tr: &flow::FlowTrace| {
                tr.states.iter().map(|st| ((f.observable)(st.p[0]) - (f.profile)(c0 * st.t)).abs()).fold(0.0, f64::max)
            };
            let half = flow::integrate(&s, &[], &p0, t_end, dt / 2.0, 1e-6)?;
            summary["error_ratio_dt_half"] = json!(err(&trace) / err(&half));
        }
    }
    summary["passed"] = json!(ok);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ok)
}
