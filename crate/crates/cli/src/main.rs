//! Command-line front end for the `huygens` library.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use huygens::hadamard::{HadamardTable, SCHEMA};
use huygens::spectral::{Spectrum, DEFAULT_DEN_GUARD};
use huygens::verify::{self, SuiteOptions};
use huygens::{Error, KData, Phase, Scalar};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "huygens", version, about = "Huygens potentials, Hadamard coefficients and exact heat kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Potential V on a grid.
    Potential(GridArgs),
    /// Closed-form Hadamard coefficients.
    Coeffs(CommonArgs),
    /// Exact heat kernel at every combination of x, ξ and t.
    Kernel(PointArgs),
    /// Baker-Akhiezer function at every combination of x and ξ.
    Ba(PointArgs),
    /// Run verification suites; one JSON report per line.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Comma-separated k values, starting with 0.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Cosine of a phase; repeat once per nonzero k (or once per k).
    #[arg(long = "phase-cos", allow_hyphen_values = true)]
    phase_cos: Vec<String>,
    /// Sine of a phase, paired with --phase-cos.
    #[arg(long = "phase-sin", allow_hyphen_values = true)]
    phase_sin: Vec<String>,
    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `exact` or `float:<bits>`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// `x0:x1:n,y0:y1:n`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Evaluation point `x1,x2`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    x: Vec<String>,
    /// Source point `ξ1,ξ2`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    xi: Vec<String>,
    /// Time; repeatable, ignored by `ba`.
    #[arg(long, allow_hyphen_values = true)]
    t: Vec<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Heat-residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Frequency added by the Darboux check.
    #[arg(long = "k-next")]
    k_next: Option<u32>,
    #[arg(long)]
    rays: Option<usize>,
    #[arg(long = "heat-samples")]
    heat_samples: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
}

/// Errors carrying an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Degenerate(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Degenerate(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Degenerate(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::InvalidKData(_) | Error::Parse(_) | Error::ModeMismatch { .. } | Error::NonPositiveTime(_) => {
                Failure::Usage(e.to_string())
            }
            Error::DegenerateWronskian => Failure::Degenerate(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> CliResult<bool> {
    match command {
        Command::Potential(a) => cmd_potential(&a),
        Command::Coeffs(a) => cmd_coeffs(&a),
        Command::Kernel(a) => cmd_points(&a, true),
        Command::Ba(a) => cmd_points(&a, false),
        Command::Verify(a) => cmd_verify(&a),
    }
}

fn load_config(path: &Option<PathBuf>) -> CliResult<Value> {
    let Some(path) = path else {
        return Ok(json!({}));
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if !v.is_object() {
        return usage("config must be a JSON object");
    }
    Ok(v)
}

fn parse_k(s: &str) -> CliResult<Vec<i64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Failure::Usage(format!("invalid k entry '{p}'")))
        })
        .collect()
}

/// KData from flags, falling back to the config file.
fn kdata(a: &CommonArgs, config: &Value) -> CliResult<KData> {
    let mut base = config.clone();
    let obj = base.as_object_mut().expect("config is an object");
    if let Some(m) = &a.mode {
        obj.insert("mode".into(), json!(m));
    }
    if let Some(k) = &a.k {
        obj.insert("k".into(), json!(parse_k(k)?));
        obj.remove("phases");
    }
    if !obj.contains_key("k") {
        return usage("no k given (use --k or --config)");
    }
    if a.phase_cos.len() != a.phase_sin.len() {
        return usage("--phase-cos and --phase-sin must be given the same number of times");
    }
    if a.phase_cos.is_empty() {
        return Ok(KData::from_json(&base)?);
    }
    let data = KData::from_json(&json!({ "k": obj["k"], "mode": obj.get("mode").cloned().unwrap_or(json!("exact")) }))?;
    let mode = data.mode();
    let mut phases: Vec<Phase> = a
        .phase_cos
        .iter()
        .zip(&a.phase_sin)
        .map(|(c, s)| Ok(Phase::new(Scalar::parse(c, mode)?, Scalar::parse(s, mode)?)))
        .collect::<huygens::Result<_>>()?;
    if phases.len() + 1 == data.len() {
        phases.insert(0, Phase::trivial(mode));
    } else if phases.len() != data.len() {
        return usage(format!(
            "expected {} or {} phases, got {}",
            data.len() - 1,
            data.len(),
            phases.len()
        ));
    }
    Ok(KData::new(data.k().iter().map(|&v| v as i64).collect(), phases, mode)?)
}

struct Axis {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Axis {
    fn parse(s: &str) -> CliResult<Axis> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Failure::Usage(format!("invalid grid axis '{s}', expected lo:hi:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || n == 0 {
            return usage(format!("grid axis '{s}' needs hi > lo and n > 0"));
        }
        Ok(Axis { lo, hi, n })
    }

    fn at(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }
}

fn parse_grid(s: &str) -> CliResult<(Axis, Axis)> {
    match s.split_once(',') {
        Some((x, y)) => Ok((Axis::parse(x)?, Axis::parse(y)?)),
        None => usage(format!("invalid grid '{s}', expected x0:x1:n,y0:y1:n")),
    }
}

fn parse_point(s: &str) -> CliResult<[f64; 2]> {
    let bad = || Failure::Usage(format!("invalid point '{s}', expected a,b"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok([
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ])
}

fn config_points(config: &Value, key: &str) -> CliResult<Vec<[f64; 2]>> {
    let Some(v) = config.get(key) else {
        return Ok(Vec::new());
    };
    let bad = || Failure::Usage(format!("config field '{key}' must be a list of [a, b] pairs"));
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|p| match p.as_array().map(|p| p.as_slice()) {
            Some([a, b]) => Ok([a.as_f64().ok_or_else(bad)?, b.as_f64().ok_or_else(bad)?]),
            _ => Err(bad()),
        })
        .collect()
}

/// Decimal with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn emit(a: &CommonArgs, text: &str) -> CliResult<()> {
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn is_singular(e: &Error) -> bool {
    matches!(e, Error::NearSingularEvaluation { .. } | Error::OriginError)
}

fn cmd_potential(a: &GridArgs) -> CliResult<bool> {
    let config = load_config(&a.common.config)?;
    let data = kdata(&a.common, &config)?;
    let grid = a
        .grid
        .clone()
        .or_else(|| config.get("grid").and_then(Value::as_str).map(String::from))
        .unwrap_or_else(|| "-2:2:64,-2:2:64".to_string());
    let (gx, gy) = parse_grid(&grid)?;
    let spectrum = Spectrum::new(&data)?;
    let cells: Vec<(f64, f64, Option<f64>)> = (0..gx.n * gy.n)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (gx.at(idx / gy.n), gy.at(idx % gy.n));
            match spectrum.potential_eval([x, y], DEFAULT_DEN_GUARD) {
                Ok(v) => Ok((x, y, Some(v))),
                Err(e) if is_singular(&e) => Ok((x, y, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<huygens::Result<_>>()?;
    let text = match a.common.format {
        Format::Csv => {
            let mut s = String::from("x1,x2,V,singular\n");
            for (x, y, v) in &cells {
                let _ = writeln!(s, "{},{},{},{}", num(*x), num(*y), csv_field(*v), v.is_none());
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "schema": SCHEMA,
            "command": "potential",
            "kdata": data.to_json(),
            "grid": grid,
            "cells": cells.iter().map(|(x, y, v)| json!({
                "x1": x, "x2": y, "V": v, "singular": v.is_none(),
            })).collect::<Vec<_>>(),
        })),
    };
    emit(&a.common, &text)?;
    Ok(true)
}

fn cmd_coeffs(a: &CommonArgs) -> CliResult<bool> {
    let config = load_config(&a.config)?;
    let data = kdata(a, &config)?;
    let table = HadamardTable::new(&data)?;
    let text = match a.format {
        Format::Json => to_json_text(&table.to_json()),
        Format::Csv => {
            let mut s = String::from("nu,sigma\n");
            for (nu, sigma) in table.sigmas().iter().enumerate() {
                let _ = writeln!(s, "{nu},\"{}\"", sigma.to_text());
            }
            s
        }
    };
    emit(a, &text)?;
    Ok(true)
}

struct Row {
    x: [f64; 2],
    xi: [f64; 2],
    t: Option<f64>,
    value: Result<f64, Error>,
}

fn cmd_points(a: &PointArgs, kernel: bool) -> CliResult<bool> {
    let config = load_config(&a.common.config)?;
    let data = kdata(&a.common, &config)?;
    let xs = if a.x.is_empty() {
        config_points(&config, "x")?
    } else {
        a.x.iter().map(|s| parse_point(s)).collect::<CliResult<_>>()?
    };
    let xis = if a.xi.is_empty() {
        config_points(&config, "xi")?
    } else {
        a.xi.iter().map(|s| parse_point(s)).collect::<CliResult<_>>()?
    };
    if xs.is_empty() || xis.is_empty() {
        return usage("at least one --x and one --xi are required");
    }
    let ts: Vec<Option<f64>> = if !kernel {
        vec![None]
    } else if !a.t.is_empty() {
        a.t.iter().map(|&t| Some(t)).collect()
    } else if let Some(list) = config.get("t").and_then(Value::as_array) {
        list.iter()
            .map(|t| t.as_f64().map(Some).ok_or_else(|| Failure::Usage("config 't' must hold numbers".into())))
            .collect::<CliResult<_>>()?
    } else {
        return usage("at least one --t is required");
    };
    let table = HadamardTable::new(&data)?;
    let mut jobs = Vec::new();
    for x in &xs {
        for xi in &xis {
            for t in &ts {
                jobs.push((*x, *xi, *t));
            }
        }
    }
    let rows: Vec<Row> = jobs
        .into_par_iter()
        .map(|(x, xi, t)| Row {
            x,
            xi,
            t,
            value: match t {
                Some(t) => table.heat_kernel_eval(x, xi, t),
                None => table.ba_eval(x, xi),
            },
        })
        .collect();
    let name = if kernel { "Phi" } else { "Psi_BA" };
    let text = match a.common.format {
        Format::Csv => {
            let mut s = format!("x1,x2,xi1,xi2,{}{name},error\n", if kernel { "t," } else { "" });
            for r in &rows {
                let _ = write!(s, "{},{},{},{},", num(r.x[0]), num(r.x[1]), num(r.xi[0]), num(r.xi[1]));
                if let Some(t) = r.t {
                    let _ = write!(s, "{},", num(t));
                }
                let (v, err) = match &r.value {
                    Ok(v) => (Some(*v), String::new()),
                    Err(e) => (None, format!("\"{}\"", e.to_string().replace('"', "'"))),
                };
                let _ = writeln!(s, "{},{err}", csv_field(v));
            }
            s
        }
        Format::Json => to_json_text(&json!({
            "schema": SCHEMA,
            "command": if kernel { "kernel" } else { "ba" },
            "kdata": data.to_json(),
            "rows": rows.iter().map(|r| {
                let mut o = json!({ "x": r.x, "xi": r.xi });
                if let Some(t) = r.t {
                    o["t"] = json!(t);
                }
                match &r.value {
                    Ok(v) => o[name] = json!(v),
                    Err(e) => {
                        o[name] = Value::Null;
                        o["error"] = json!(e.to_string());
                    }
                }
                o
            }).collect::<Vec<_>>(),
        })),
    };
    emit(&a.common, &text)?;
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<bool> {
    let config = load_config(&a.common.config)?;
    let data = kdata(&a.common, &config)?;
    let suite = a
        .suite
        .clone()
        .or_else(|| config.get("suite").and_then(Value::as_str).map(String::from))
        .unwrap_or_else(|| "all".to_string());
    let mut opts = SuiteOptions::default();
    if let Some(seed) = a.seed.or_else(|| config.get("seed").and_then(Value::as_u64)) {
        opts.seed = seed;
    }
    opts.k_next = a.k_next;
    opts.tol = a.tol.or_else(|| config.get("tol").and_then(Value::as_f64));
    if let Some(tol) = opts.tol {
        if tol.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return usage("--tol must be positive");
        }
    }
    if let Some(r) = a.rays {
        opts.rays = r;
    }
    if let Some(h) = a.heat_samples {
        opts.heat_samples = h;
    }
    if a.common.format == Format::Csv {
        return usage("verify emits JSON lines only");
    }
    let reports = verify::run_suite(&data, &suite, &opts)?;
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    emit(&a.common, &text)?;
    Ok(reports.iter().all(|r| r.passed()))
}
