//! The `qest` command line.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{bound_report, BoundReport, WeightSpec};
use crate::error::{QestError, Result};
use crate::fisher::classical_fisher;
use crate::linalg::SymMat;
use crate::model::{ThetaParams, MIN_ABS_THETA1};
use crate::povm::{build_optimal_estimator, build_optimal_povm};
use crate::region;
use crate::report::{fmt_sig, round_json};
use crate::simulate::{self, SimConfig, Strategy};

pub const SEED_ENV: &str = "QEST_SEED";

#[derive(Debug, Parser)]
#[command(name = "qest", version, about = "Qubit estimation with an unknown phase: bounds, optimal measurements, simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every precision bound at one point.
    Bounds(BoundsArgs),
    /// Optimal measurement and its locally unbiased estimator.
    Povm(PovmArgs),
    /// Membership of a candidate MSE matrix in an attainable region.
    Region(RegionArgs),
    /// Monte-Carlo MSE of a measurement strategy.
    Simulate(SimulateArgs),
    /// Bounds along a grid of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Nuisance {
    Known,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Model point `theta1,theta2,theta3`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    /// `identity`, inline row-major CSV (e.g. `2,0,0,1`), or a CSV file with one row per line.
    #[arg(long, default_value = "identity", allow_hyphen_values = true)]
    pub weight: String,
    #[arg(long, value_enum, default_value_t = Nuisance::Known)]
    pub nuisance: Nuisance,
    /// Phase weight for a block weight when the phase is unknown.
    #[arg(long)]
    pub w3: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: WeightArgs,
    /// Phase MSE entry; adds the γ-factor to the report.
    #[arg(long)]
    pub v33: Option<f64>,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PovmArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long, default_value = "identity", allow_hyphen_values = true)]
    pub weight: String,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionSet {
    D,
    DGm,
    D3,
    Sld3,
    H,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    /// Candidate MSE matrix: inline row-major CSV or a CSV file.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "scan")]
    pub candidate: Option<String>,
    #[arg(long, value_enum, default_value_t = RegionSet::D)]
    pub set: RegionSet,
    /// Emit the boundary of the two-parameter region as CSV instead of a verdict.
    #[arg(long)]
    pub scan: bool,
    /// Boundary points for `--scan`.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// With `--scan`: inflate by the γ-factor of this phase MSE.
    #[arg(long)]
    pub v33: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long, default_value = "identity", allow_hyphen_values = true)]
    pub weight: String,
    #[arg(long, default_value = "single-copy-optimal")]
    pub strategy: String,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Overridden by the QEST_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Phase copies grow as n^e [default: 0.5 for two-step, 2/3 for adaptive]
    #[arg(long)]
    pub phase_exponent: Option<f64>,
    #[arg(long, default_value_t = simulate::DEFAULT_BATCH)]
    pub batch: u64,
    /// Comma-separated copy numbers; emits one CSV row per value.
    #[arg(long)]
    pub convergence: Option<String>,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Theta1,
    Theta2,
    Theta3,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: WeightArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, allow_hyphen_values = true)]
    pub min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub max: f64,
    #[arg(long)]
    pub steps: usize,
}

fn parse_numbers(text: &str, origin: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (l, line) in text.split(['\n', ';']).enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(f, v)| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| QestError::Parse(format!("{origin} line {}, field {}: '{}' is not a number", l + 1, f + 1, v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a square matrix from inline CSV or a file. A single inline row is read row-major.
pub fn parse_matrix(spec: &str) -> Result<SymMat> {
    let path = Path::new(spec);
    let (text, origin) = if path.is_file() {
        (std::fs::read_to_string(path).map_err(|e| QestError::Parse(format!("{spec}: {e}")))?, spec.to_string())
    } else {
        (spec.to_string(), "matrix".to_string())
    };
    let rows = parse_numbers(&text, &origin)?;
    let flat: Vec<f64> = rows.concat();
    let dim = match flat.len() {
        4 => 2,
        9 => 3,
        n => return Err(QestError::Parse(format!("{origin}: expected 4 or 9 entries, got {n}"))),
    };
    if rows.len() > 1 && rows.iter().any(|r| r.len() != dim) {
        return Err(QestError::Parse(format!("{origin}: every row needs {dim} fields")));
    }
    SymMat::from_row_major(dim, &flat)
}

fn parse_theta(s: &str) -> Result<ThetaParams> {
    s.parse()
}

/// Weight for the requested parameter count.
pub fn resolve_weight(spec: &str, nuisance: Nuisance, w3: Option<f64>) -> Result<(usize, WeightSpec)> {
    let m = if spec.trim().eq_ignore_ascii_case("identity") { None } else { Some(parse_matrix(spec)?) };
    match nuisance {
        Nuisance::Known => {
            if w3.is_some() {
                return Err(QestError::InvalidConfig("--w3 needs --nuisance unknown".into()));
            }
            match m {
                None => Ok((2, WeightSpec::identity(2))),
                Some(m) if m.dim() == 2 => Ok((2, WeightSpec::full(m)?)),
                Some(_) => Err(QestError::InvalidConfig("a 3x3 weight needs --nuisance unknown".into())),
            }
        }
        Nuisance::Unknown => match m {
            None => Ok((3, WeightSpec::block(SymMat::identity(2), w3.unwrap_or(1.0))?)),
            Some(m) if m.dim() == 2 => Ok((3, WeightSpec::block(m, w3.unwrap_or(1.0))?)),
            Some(m) => {
                if w3.is_some() {
                    return Err(QestError::InvalidConfig("--w3 only applies to a 2x2 block weight".into()));
                }
                Ok((3, WeightSpec::full(m)?))
            }
        },
    }
}

fn weight2(spec: &str) -> Result<SymMat> {
    let (_, w) = resolve_weight(spec, Nuisance::Known, None)?;
    w.matrix(2)
}

fn emit_json(out: &mut dyn Write, mut v: serde_json::Value) -> Result<()> {
    round_json(&mut v);
    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("valid json")).map_err(io_err)
}

fn io_err(e: std::io::Error) -> QestError {
    QestError::InvalidConfig(format!("output: {e}"))
}

const BOUNDS_HEADER: &str = "k,theta1,theta2,theta3,sld_cr,rld_cr,nagaoka_hgm,holevo,gamma";

fn bounds_row(r: &BoundReport) -> String {
    let t = r.theta.as_array();
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.k,
        fmt_sig(t[0]),
        fmt_sig(t[1]),
        fmt_sig(t[2]),
        fmt_sig(r.sld_cr),
        fmt_sig(r.rld_cr),
        fmt_sig(r.nagaoka_hgm),
        fmt_sig(r.holevo),
        r.gamma.map(fmt_sig).unwrap_or_default()
    )
}

pub fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let t = parse_theta(&a.common.theta)?;
    let (k, w) = resolve_weight(&a.common.weight, a.common.nuisance, a.common.w3)?;
    let r = bound_report(&t, k, &w, a.v33)?;
    match a.output {
        Output::Json => emit_json(out, serde_json::to_value(&r).expect("serializable")),
        Output::Csv => writeln!(out, "{BOUNDS_HEADER}\n{}", bounds_row(&r)).map_err(io_err),
    }
}

pub fn cmd_povm(a: &PovmArgs, out: &mut dyn Write) -> Result<()> {
    let t = parse_theta(&a.theta)?;
    let w = weight2(&a.weight)?;
    let (povm, plan) = build_optimal_povm(&t, &w)?;
    let est = build_optimal_estimator(&t, &povm, 2)?;
    match a.output {
        Output::Csv => write!(out, "{}", est.to_csv()).map_err(io_err),
        Output::Json => {
            let j = classical_fisher(&t, &povm, 2)?;
            let jinv = j.inverse()?;
            let estimator: Vec<_> =
                povm.elements().iter().zip(&est.estimates).map(|(e, v)| json!({"label": e.label, "estimate": v})).collect();
            emit_json(
                out,
                json!({
                    "theta": t,
                    "plan": plan,
                    "povm": povm.to_json(),
                    "estimator": estimator,
                    "classical_fisher": j.matrix.to_rows(),
                    "weighted_mse": w.trace_product(&jinv),
                }),
            )
        }
    }
}

pub fn cmd_region(a: &RegionArgs, out: &mut dyn Write) -> Result<()> {
    let t = parse_theta(&a.theta)?;
    if a.scan {
        return region_scan(&t, a, out);
    }
    let v = parse_matrix(a.candidate.as_deref().unwrap_or_default())?;
    let verdict = match a.set {
        RegionSet::D => region::in_region_d(&v, &t)?,
        RegionSet::DGm => region::in_region_d_gm(&v, &t)?,
        RegionSet::D3 => region::in_region_d3(&v, &t)?,
        RegionSet::Sld3 => region::in_region_sld3(&v, &t)?,
        RegionSet::H => region::in_region_h(&v, &t)?,
    };
    emit_json(out, serde_json::to_value(&verdict).expect("serializable"))
}

/// Boundary `det(V - γA) = det(γA)` with `V - γA` diagonal, `A = G⁻¹`.
fn region_scan(t: &ThetaParams, a: &RegionArgs, out: &mut dyn Write) -> Result<()> {
    if a.points < 2 {
        return Err(QestError::InvalidConfig("--points must be at least 2".into()));
    }
    let gamma = match a.v33 {
        Some(v) => crate::bounds::gamma_factor(v, 1.0 / (t.theta1() * t.theta1()))?,
        None => 1.0,
    };
    let ga = crate::fisher::sld_fisher_inverse_closed_form(t, 2)?.scale(gamma);
    let d = ga.det();
    let mut s = String::from("x,v11,v12,v22\n");
    // x spans (V - γA)_11 logarithmically over four decades around √det
    let root = d.sqrt();
    for i in 0..a.points {
        let x = root * 10f64.powf(-2.0 + 4.0 * i as f64 / (a.points - 1) as f64);
        let y = d / x;
        s.push_str(&format!("{},{},{},{}\n", fmt_sig(x), fmt_sig(ga.get(0, 0) + x), fmt_sig(ga.get(0, 1)), fmt_sig(ga.get(1, 1) + y)));
    }
    write!(out, "{s}").map_err(io_err)
}

/// Seed from `QEST_SEED` if set, otherwise `fallback`.
pub fn effective_seed(fallback: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| QestError::Parse(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let t = parse_theta(&a.theta)?;
    let w = weight2(&a.weight)?;
    let mut cfg = SimConfig::new(t, WeightSpec::full(w)?, a.strategy.parse::<Strategy>()?, a.n, a.trials, effective_seed(a.seed)?);
    if let Some(e) = a.phase_exponent {
        cfg.phase_fraction_exponent = e;
        cfg.adaptive_phase_exponent = e;
    }
    cfg.batch_size = a.batch;
    if let Some(ns) = &a.convergence {
        let ns = ns
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| QestError::Parse(format!("convergence: '{s}' is not an integer"))))
            .collect::<Result<Vec<_>>>()?;
        for n in &ns {
            for w in (SimConfig { n: *n, ..cfg.clone() }).validate()? {
                writeln!(err, "warning (n={n}): {w}").map_err(io_err)?;
            }
        }
        let rows = simulate::run_convergence(&cfg, &ns)?;
        return write!(out, "{}", simulate::convergence_csv(&rows)).map_err(io_err);
    }
    for w in cfg.validate()? {
        writeln!(err, "warning: {w}").map_err(io_err)?;
    }
    let r = simulate::run(&cfg)?;
    match a.output {
        Output::Json => {
            let mut v = serde_json::to_value(&r).expect("serializable");
            v["theta"] = serde_json::to_value(t).expect("serializable");
            v["seed"] = json!(cfg.seed);
            emit_json(out, v)
        }
        Output::Csv => writeln!(
            out,
            "n,n_weighted_mse,stderr,gamma,strategy\n{},{},{},{},{}",
            r.n,
            fmt_sig(r.n_times_weighted_mse),
            fmt_sig(r.stderr),
            r.two_step.and_then(|d| d.gamma).map(fmt_sig).unwrap_or_default(),
            cfg.strategy
        )
        .map_err(io_err),
    }
}

/// Points with `|θ1|` below this are skipped.
const SWEEP_SKIP: f64 = 1e-3;
/// Points with `|θ1|` below this are flagged.
const SWEEP_FLAG: f64 = 1e-2;

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let base: Vec<f64> = parse_numbers(&a.common.theta, "theta")?.concat();
    if base.len() != 3 {
        return Err(QestError::Parse(format!("theta needs 3 comma-separated values, got {}", base.len())));
    }
    if a.steps == 0 {
        return Err(QestError::InvalidConfig("--steps must be positive".into()));
    }
    if !(a.min.is_finite() && a.max.is_finite()) || a.min > a.max {
        return Err(QestError::InvalidConfig("need finite --min <= --max".into()));
    }
    let (k, w) = resolve_weight(&a.common.weight, a.common.nuisance, a.common.w3)?;
    let axis = match a.axis {
        Axis::Theta1 => 0,
        Axis::Theta2 => 1,
        Axis::Theta3 => 2,
    };
    let mut s = format!("axis,value,{BOUNDS_HEADER},flag\n");
    for i in 0..a.steps {
        let value = if a.steps == 1 { a.min } else { a.min + (a.max - a.min) * i as f64 / (a.steps - 1) as f64 };
        let mut p = [base[0], base[1], base[2]];
        p[axis] = value;
        if p[0].abs() < SWEEP_SKIP.max(MIN_ABS_THETA1) {
            writeln!(
                err,
                "notice: skipping {}={} (|theta1| < {SWEEP_SKIP}: phase information vanishes)",
                axis_name(a.axis),
                fmt_sig(value)
            )
            .map_err(io_err)?;
            continue;
        }
        let t = match ThetaParams::new(p[0], p[1], p[2]) {
            Ok(t) => t,
            Err(e) => {
                writeln!(err, "notice: skipping {}={}: {e}", axis_name(a.axis), fmt_sig(value)).map_err(io_err)?;
                continue;
            }
        };
        let r = bound_report(&t, k, &w, None)?;
        let flag = if t.theta1().abs() < SWEEP_FLAG { "near_singular" } else { "" };
        s.push_str(&format!("{},{},{},{flag}\n", axis_name(a.axis), fmt_sig(value), bounds_row(&r)));
    }
    write!(out, "{s}").map_err(io_err)
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::Theta1 => "theta1",
        Axis::Theta2 => "theta2",
        Axis::Theta3 => "theta3",
    }
}

/// Dispatches a parsed command line.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Povm(a) => cmd_povm(a, out),
        Command::Region(a) => cmd_region(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
    }
}
