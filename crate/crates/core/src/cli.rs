//! Command-line front end.
//!
//! Exit codes: `0` success, `1` I/O failure or oracle/closed-form
//! disagreement, `2` usage or validation error, `3` physical degeneracy
//! (impossible postselection, undefined temperature, no feasible point).

use std::collections::HashSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::closed_form::{beta_f_general, success_prob_general, BathConfig};
use crate::error::Error;
use crate::optimize::{self, OptimizerSettings};
use crate::sweep::{self, linspace, SweepTable};
use crate::switch_sim::{self, ControlSpec, MeasureSpec, P_MIN};

/// Largest oracle/closed-form difference accepted by `oracle`.
pub const AGREEMENT_TOL: f64 = 1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ico-thermal",
    version,
    about = "Qubit thermalization under a quantum SWITCH of two thermal baths"
)]
struct Cli {
    /// Flat key=value file; keys are long flag names, explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed-form effective inverse temperature.
    #[command(allow_negative_numbers = true)]
    Betaf(PointArgs),
    /// Run the brute-force SWITCH simulation and compare with the closed form.
    #[command(allow_negative_numbers = true)]
    Oracle(PointArgs),
    /// Extremize beta_f over the measurement direction.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Write a gridded table (theta curve, heat map, extrema sweeps).
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    ThetaCurve,
    Heatmap,
    ExtremaVsN,
    ExtremaVsTheta,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SecondBath {
    /// Inverse temperature of bath 2.
    #[arg(long = "beta-t2")]
    beta_t2: Option<f64>,
    /// Asymmetry ratio: beta_t2 = n * beta_t1.
    #[arg(long)]
    n: Option<f64>,
}

#[derive(Debug, Args)]
struct Units {
    /// Energy gap; inverse temperatures are multiplied by it on input and
    /// beta_f divided by it on output.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Read angles in degrees instead of radians.
    #[arg(long)]
    degrees: bool,
}

#[derive(Debug, Args)]
struct ControlArgs {
    /// Bloch radius of the control qubit.
    #[arg(long)]
    r: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long = "beta-t1")]
    beta_t1: f64,
    #[command(flatten)]
    second: SecondBath,
    #[arg(long = "beta-i")]
    beta_i: f64,
    #[command(flatten)]
    control: ControlArgs,
    /// Measurement polar angle.
    #[arg(long = "Theta")]
    measure_theta: f64,
    /// Measurement azimuth.
    #[arg(long = "Phi")]
    measure_phi: f64,
    #[command(flatten)]
    units: Units,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long = "beta-t1")]
    beta_t1: f64,
    #[command(flatten)]
    second: SecondBath,
    #[arg(long = "beta-i")]
    beta_i: f64,
    #[command(flatten)]
    control: ControlArgs,
    #[command(flatten)]
    units: Units,
    /// Coarse grid points along Theta.
    #[arg(long = "grid-theta", default_value_t = 181)]
    grid_theta: usize,
    /// Coarse grid points along Phi.
    #[arg(long = "grid-phi", default_value_t = 73)]
    grid_phi: usize,
    /// Success-probability floor for feasible measurement directions.
    #[arg(long = "min-prob", default_value_t = P_MIN)]
    min_prob: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    kind: SweepKind,
    #[arg(long = "beta-t1", default_value_t = 1.0)]
    beta_t1: f64,
    #[arg(long = "beta-t2", conflicts_with = "n")]
    beta_t2: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    /// Defaults to beta-t1.
    #[arg(long = "beta-i")]
    beta_i: Option<f64>,
    /// Control purity; a comma-separated list for extrema-vs-n.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    r: Vec<f64>,
    /// Phi - phi for heat maps.
    #[arg(long = "delta-phi", default_value_t = 0.0)]
    delta_phi: f64,
    /// Control polar-angle grid points (kind-specific default).
    #[arg(long = "theta-steps")]
    theta_steps: Option<usize>,
    /// Measurement polar-angle grid points for heat maps.
    #[arg(long = "Theta-steps", default_value_t = 181)]
    measure_theta_steps: usize,
    #[arg(long = "n-min", default_value_t = 0.25)]
    n_min: f64,
    #[arg(long = "n-max", default_value_t = 4.0)]
    n_max: f64,
    #[arg(long = "n-steps", default_value_t = 31)]
    n_steps: usize,
    #[arg(long = "grid-theta", default_value_t = 181)]
    grid_theta: usize,
    #[arg(long = "grid-phi", default_value_t = 73)]
    grid_phi: usize,
    #[arg(long = "min-prob", default_value_t = P_MIN)]
    min_prob: f64,
    #[command(flatten)]
    units: Units,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_physical_degeneracy() {
            EXIT_DEGENERATE
        } else {
            EXIT_USAGE
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Parses a flat `key=value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(format!("config line {}: empty key", lineno + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Appends config-file settings as flags for every key not given on the
/// command line.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config_path = None;
    let mut present = HashSet::new();
    let mut k = 1;
    while k < strs.len() {
        if let Some(flag) = strs[k].strip_prefix("--") {
            let name = flag.split('=').next().unwrap_or(flag).to_string();
            if name == "config" {
                config_path = match flag.split_once('=') {
                    Some((_, v)) => Some(v.to_string()),
                    None => strs.get(k + 1).cloned(),
                };
            }
            present.insert(name);
        }
        k += 1;
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("config file {path}: {e}")))?;
    let entries = parse_config(&text).map_err(usage)?;
    let second_bath_given = present.contains("beta-t2") || present.contains("n");

    let mut merged = args;
    for (key, value) in entries {
        if key == "config" || present.contains(&key) {
            continue;
        }
        if second_bath_given && (key == "beta-t2" || key == "n") {
            continue;
        }
        if key == "degrees" {
            match value.as_str() {
                "true" | "1" | "yes" => merged.push("--degrees".into()),
                "false" | "0" | "no" => {}
                _ => return Err(usage(format!("config: degrees={value} is not a boolean"))),
            }
            continue;
        }
        merged.push(format!("--{key}").into());
        merged.push(value.into());
    }
    Ok(merged)
}

fn dispatch(cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Betaf(a) => cmd_betaf(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn check_delta(delta: f64) -> Result<(), Failure> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--delta must be positive and finite, got {delta}")))
    }
}

fn angle(units: &Units, x: f64) -> f64 {
    if units.degrees {
        x.to_radians()
    } else {
        x
    }
}

fn baths(beta_t1: f64, second: (Option<f64>, Option<f64>), beta_i: f64, units: &Units) -> Result<BathConfig, Failure> {
    check_delta(units.delta)?;
    let d = units.delta;
    let b = match second {
        (Some(b2), None) => BathConfig::new(beta_t1 * d, b2 * d, beta_i * d)?,
        (None, Some(n)) => BathConfig::with_ratio(beta_t1 * d, n, beta_i * d)?,
        (None, None) => BathConfig::identical(beta_t1 * d, beta_i * d)?,
        (Some(_), Some(_)) => return Err(usage("--beta-t2 and --n are mutually exclusive")),
    };
    Ok(b)
}

fn control(c: &ControlArgs, units: &Units) -> Result<ControlSpec, Failure> {
    Ok(ControlSpec::new(c.r, angle(units, c.theta), angle(units, c.phi))?)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => sweep::write_atomic(path, text.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Renders a flat record as a JSON object or as a two-line CSV.
fn render_record(fields: &[(&str, Value)], format: Format) -> String {
    match format {
        Format::Json => {
            let obj: serde_json::Map<String, Value> =
                fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            format!("{}\n", Value::Object(obj))
        }
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = fields
                .iter()
                .map(|(_, v)| match v {
                    Value::Number(n) => sweep::fmt_float(n.as_f64().unwrap_or(f64::NAN)),
                    Value::Null => "nan".to_string(),
                    Value::Bool(b) => b.to_string(),
                    other => other.to_string(),
                })
                .collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn point_inputs(a: &PointArgs) -> Result<(BathConfig, ControlSpec, MeasureSpec), Failure> {
    let b = baths(a.beta_t1, (a.second.beta_t2, a.second.n), a.beta_i, &a.units)?;
    let c = control(&a.control, &a.units)?;
    let m = MeasureSpec::new(angle(&a.units, a.measure_theta), angle(&a.units, a.measure_phi))?;
    Ok((b, c, m))
}

fn cmd_betaf(a: &PointArgs) -> Result<i32, Failure> {
    let (b, c, m) = point_inputs(a)?;
    let beta_f = beta_f_general(&b, &c, &m)?;
    let p = success_prob_general(&b, &c, &m);
    let fields = [
        ("beta_f", num(beta_f / a.units.delta)),
        ("p_success", num(p)),
        ("cooling", Value::Bool(beta_f > b.beta_t1())),
    ];
    emit(&render_record(&fields, a.format), a.output.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &PointArgs) -> Result<i32, Failure> {
    let (b, c, m) = point_inputs(a)?;
    let res = switch_sim::oracle_beta_f(&b, &c, &m)?;
    let closed = beta_f_general(&b, &c, &m).ok();
    let agreement = closed.map_or(f64::NAN, |v| (v - res.beta_f).abs());
    let d = a.units.delta;
    let fields = [
        ("beta_f", num(res.beta_f / d)),
        ("p_success", num(res.prob)),
        ("max_offdiag", num(res.max_offdiag)),
        ("closed_form_beta_f", num(closed.map_or(f64::NAN, |v| v / d))),
        ("agreement", num(agreement / d)),
    ];
    emit(&render_record(&fields, a.format), a.output.as_deref())?;
    if agreement <= AGREEMENT_TOL {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: oracle and closed form differ by {agreement:e} (tolerance {AGREEMENT_TOL:e})");
        Ok(EXIT_FAILURE)
    }
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<i32, Failure> {
    let b = baths(a.beta_t1, (a.second.beta_t2, a.second.n), a.beta_i, &a.units)?;
    let c = control(&a.control, &a.units)?;
    let settings = OptimizerSettings {
        grid_theta: a.grid_theta,
        grid_phi: a.grid_phi,
        min_prob: a.min_prob,
        ..OptimizerSettings::default()
    };
    let res = optimize::find_extrema_with(&b, &c, &settings)?;
    let d = a.units.delta;
    let fields = [
        ("beta_f_max", num(res.beta_f_max / d)),
        ("measure_theta_max", num(res.angles_max.theta())),
        ("measure_phi_max", num(res.angles_max.phi())),
        ("prob_max", num(res.prob_max)),
        ("beta_f_min", num(res.beta_f_min / d)),
        ("measure_theta_min", num(res.angles_min.theta())),
        ("measure_phi_min", num(res.angles_min.phi())),
        ("prob_min", num(res.prob_min)),
    ];
    emit(&render_record(&fields, a.format), a.output.as_deref())?;
    Ok(EXIT_OK)
}

fn steps(name: &str, n: usize, min: usize) -> Result<usize, Failure> {
    if n < min {
        Err(usage(format!("--{name} must be at least {min}")))
    } else {
        Ok(n)
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32, Failure> {
    use std::f64::consts::PI;
    let beta_i = a.beta_i.unwrap_or(a.beta_t1);
    let settings = OptimizerSettings {
        grid_theta: a.grid_theta,
        grid_phi: a.grid_phi,
        min_prob: a.min_prob,
        ..OptimizerSettings::default()
    };
    let single_r = || -> Result<f64, Failure> {
        match a.r.as_slice() {
            [r] => Ok(*r),
            _ => Err(usage("--r takes a single value for this kind")),
        }
    };
    let table: SweepTable = match a.kind {
        SweepKind::ThetaCurve => {
            let b = baths(a.beta_t1, (a.beta_t2, a.n), beta_i, &a.units)?;
            let grid = optimize::interior_theta_grid(steps("theta-steps", a.theta_steps.unwrap_or(181), 1)?);
            optimize::optimal_theta_curve(&b, single_r()?, &grid, &settings)?
        }
        SweepKind::Heatmap => {
            let b = baths(a.beta_t1, (a.beta_t2, a.n), beta_i, &a.units)?;
            let tg = linspace(0.0, PI, steps("theta-steps", a.theta_steps.unwrap_or(181), 2)?);
            let mg = linspace(0.0, PI, steps("Theta-steps", a.measure_theta_steps, 2)?);
            optimize::heatmap(&b, single_r()?, angle(&a.units, a.delta_phi), &tg, &mg)?
        }
        SweepKind::ExtremaVsTheta => {
            let b = baths(a.beta_t1, (a.beta_t2, a.n), beta_i, &a.units)?;
            let tg = linspace(0.0, PI, steps("theta-steps", a.theta_steps.unwrap_or(91), 2)?);
            optimize::extrema_over_theta(&b, single_r()?, &tg, &settings)?
        }
        SweepKind::ExtremaVsN => {
            if a.beta_t2.is_some() || a.n.is_some() {
                return Err(usage("extrema-vs-n takes --n-min/--n-max/--n-steps, not --n or --beta-t2"));
            }
            check_delta(a.units.delta)?;
            let ng = linspace(a.n_min, a.n_max, steps("n-steps", a.n_steps, 1)?);
            let mut rs = a.r.clone();
            rs.sort_by(f64::total_cmp);
            rs.dedup();
            let tg = linspace(0.0, PI, steps("theta-steps", a.theta_steps.unwrap_or(91), 2)?);
            optimize::extrema_vs_n(
                a.beta_t1 * a.units.delta,
                beta_i * a.units.delta,
                &ng,
                &rs,
                &tg,
                &settings,
            )?
        }
    };
    let text = match a.format {
        Format::Csv => table.to_csv_string(),
        Format::Json => format!("{}\n", table.to_json()),
    };
    emit(&text, a.output.as_deref())?;
    Ok(EXIT_OK)
}
