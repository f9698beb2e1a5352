//! `hbmo` — command-line front end for the hbmo toolkit.
//!
//! Subcommands: `constants`, `eval`, `bmo`, `verify`, `volume`. Output is
//! JSON (one object per line) or CSV (`--format csv`). Runs are
//! deterministic functions of the seed: identical flags produce
//! byte-identical value fields regardless of thread count.
//!
//! Exit codes: 0 success, 1 usage error, 2 divergent result, 3 accuracy
//! failure.

mod config;
mod output;

use clap::{value_parser, Arg, ArgMatches, Command};
use config::{resolve, resolve_opt, resolve_seed, ConfigError, FileConfig};
use hbmo_core::constants::{
    closed_form, mc_constant, quad_constant, ConstantFamily, ConstantQuery, ConstantResult,
    ConstantStatus,
};
use hbmo_core::functions::corpus_lookup;
use hbmo_core::operators::{eval_operator, KernelFamily, KernelSpec, PhiSpec, QuadratureConfig};
use hbmo_core::verify::{suite_bounds, suite_extremal, suite_identities, VerificationReport};
use hbmo_core::{
    bmo_seminorm_lb, default_grid, mc_run, unit_ball_volume, BallGrid, GroupDimension, HbmoError,
    SeededStream, VolumeMethod, DEFAULT_CHUNK,
};
use output::{print_csv, JsonObject, Value};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(HbmoError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<HbmoError> for CliError {
    fn from(e: HbmoError) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(HbmoError::DivergentIntegral { .. }) => 2,
            CliError::Core(HbmoError::AccuracyFailure { .. }) => 3,
            CliError::Core(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Settings shared by every subcommand.
struct Run {
    seed: u64,
    format: OutputFormat,
    start: Instant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
}

impl Run {
    fn stream(&self) -> SeededStream {
        SeededStream::new(self.seed)
    }

    fn runtime_ms(&self) -> u128 {
        self.start.elapsed().as_millis()
    }

    fn emit(&self, obj: JsonObject) {
        println!("{}", obj.finish_line(self.seed, self.runtime_ms()));
    }
}

fn build_cli() -> Command {
    let global = |c: Command| {
        c.arg(
            Arg::new("seed")
                .long("seed")
                .help("Base seed for all randomness (env HBMO_SEED when unset)")
                .value_parser(value_parser!(u64))
                .default_value("0")
                .global(true),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .help("Worker threads; 0 = all available cores. Values never depend on this.")
                .value_parser(value_parser!(usize))
                .default_value("0")
                .global(true),
        )
        .arg(
            Arg::new("config")
                .long("config")
                .help("Flat key = value config file; command line overrides it")
                .value_parser(value_parser!(PathBuf))
                .global(true),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .help("Output format")
                .value_parser(["json", "csv"])
                .default_value("json")
                .global(true),
        )
    };

    global(
        Command::new("hbmo")
            .about("Numerical toolkit for gauge-kernel operators on the Heisenberg group")
            .version(env!("CARGO_PKG_VERSION"))
            .subcommand_required(true)
            .arg_required_else_help(true)
            .subcommand(
                Command::new("constants")
                    .about("Sharp operator constants: closed form, quadrature, Monte Carlo")
                    .arg(Arg::new("family").long("family").help("A, B or F"))
                    .arg(
                        Arg::new("m")
                            .long("m")
                            .help("Multilinearity")
                            .value_parser(value_parser!(usize)),
                    )
                    .arg(
                        Arg::new("n")
                            .long("n")
                            .help("Group index (Q = 2n + 2)")
                            .value_parser(value_parser!(usize))
                            .default_value("1"),
                    )
                    .arg(
                        Arg::new("beta")
                            .long("beta")
                            .help("Kernel exponent")
                            .value_parser(value_parser!(f64)),
                    )
                    .arg(
                        Arg::new("method")
                            .long("method")
                            .value_parser(["closed", "quad", "mc", "all"])
                            .default_value("closed"),
                    )
                    .arg(
                        Arg::new("samples")
                            .long("samples")
                            .help("Monte-Carlo sample count")
                            .value_parser(value_parser!(u64))
                            .default_value("1000000"),
                    )
                    .arg(
                        Arg::new("truncation")
                            .long("truncation")
                            .help("Radial truncation for Monte-Carlo runs of divergent queries")
                            .value_parser(value_parser!(f64)),
                    )
                    .arg(
                        Arg::new("tolerance")
                            .long("tolerance")
                            .help("Relative tolerance for the quadrature route")
                            .value_parser(value_parser!(f64))
                            .default_value("1e-8"),
                    )
                    .arg(
                        Arg::new("phi")
                            .long("phi")
                            .help("Weight function for family F")
                            .default_value("unit-ball-indicator"),
                    )
                    .arg(
                        Arg::new("volume-method")
                            .long("volume-method")
                            .value_parser(["measured", "gamma-formula"])
                            .default_value("measured"),
                    ),
            )
            .subcommand(
                Command::new("eval")
                    .about("Evaluate an operator at a point by seeded Monte Carlo")
                    .arg(Arg::new("family").long("family").help("hlp, hilbert or hausdorff"))
                    .arg(
                        Arg::new("m")
                            .long("m")
                            .value_parser(value_parser!(usize)),
                    )
                    .arg(
                        Arg::new("beta")
                            .long("beta")
                            .value_parser(value_parser!(f64)),
                    )
                    .arg(
                        Arg::new("functions")
                            .long("functions")
                            .help("Comma-separated corpus names, one per factor"),
                    )
                    .arg(
                        Arg::new("point")
                            .long("point")
                            .help("Comma-separated coordinates (2n + 1 of them)"),
                    )
                    .arg(
                        Arg::new("n")
                            .long("n")
                            .value_parser(value_parser!(usize))
                            .default_value("1"),
                    )
                    .arg(
                        Arg::new("samples")
                            .long("samples")
                            .value_parser(value_parser!(u64))
                            .default_value("100000"),
                    )
                    .arg(
                        Arg::new("truncation")
                            .long("truncation")
                            .value_parser(value_parser!(f64)),
                    )
                    .arg(
                        Arg::new("phi")
                            .long("phi")
                            .default_value("unit-ball-indicator"),
                    ),
            )
            .subcommand(
                Command::new("bmo")
                    .about("Grid lower bound for the BMO seminorm of a corpus function")
                    .arg(Arg::new("function").long("function").help("Corpus function name"))
                    .arg(
                        Arg::new("n")
                            .long("n")
                            .value_parser(value_parser!(usize))
                            .default_value("1"),
                    )
                    .arg(
                        Arg::new("per-ball-samples")
                            .long("per-ball-samples")
                            .value_parser(value_parser!(u64))
                            .default_value("4096"),
                    )
                    .arg(
                        Arg::new("radii")
                            .long("radii")
                            .help("Comma-separated ball radii (default: nine log-spaced 1e-2..1e2)"),
                    )
                    .arg(
                        Arg::new("centers")
                            .long("centers")
                            .help("Ball centers: the sampled default set or the identity only")
                            .value_parser(["default", "identity"])
                            .default_value("default"),
                    ),
            )
            .subcommand(
                Command::new("verify")
                    .about("Run verification suites and report lhs/rhs agreement")
                    .arg(
                        Arg::new("suite")
                            .long("suite")
                            .value_parser(["identities", "bounds", "extremal", "all"])
                            .default_value("all"),
                    )
                    .arg(
                        Arg::new("n")
                            .long("n")
                            .value_parser(value_parser!(usize))
                            .default_value("1"),
                    )
                    .arg(
                        Arg::new("samples")
                            .long("samples")
                            .help("Monte-Carlo budget per identity/extremal check")
                            .value_parser(value_parser!(u64))
                            .default_value("100000"),
                    )
                    .arg(
                        Arg::new("point-samples")
                            .long("point-samples")
                            .help("Per-point budget of the bound suite's operator fields")
                            .value_parser(value_parser!(u64))
                            .default_value("1024"),
                    ),
            )
            .subcommand(
                Command::new("volume")
                    .about("Gauge-ball volume: quadrature-measured, Gamma formula, or Monte Carlo")
                    .arg(
                        Arg::new("n")
                            .long("n")
                            .value_parser(value_parser!(usize))
                            .default_value("1"),
                    )
                    .arg(
                        Arg::new("radius")
                            .long("radius")
                            .value_parser(value_parser!(f64))
                            .default_value("1"),
                    )
                    .arg(
                        Arg::new("method")
                            .long("method")
                            .value_parser(["measured", "gamma-formula", "mc"])
                            .default_value("measured"),
                    )
                    .arg(
                        Arg::new("samples")
                            .long("samples")
                            .value_parser(value_parser!(u64))
                            .default_value("1000000"),
                    ),
            ),
    )
}

fn main() {
    let matches = match build_cli().try_get_matches_from(std::env::args_os()) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&matches) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(top: &ArgMatches) -> Result<i32, CliError> {
    let (name, sub) = top.subcommand().expect("subcommand required");
    let cfg = match resolve_opt::<PathBuf>(sub, &FileConfig::default(), "config")? {
        Some(path) => FileConfig::load(&path)?,
        None => FileConfig::default(),
    };

    let seed = resolve_seed(sub, &cfg)?;
    let threads: usize = resolve(sub, &cfg, "threads")?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("cannot size thread pool: {e}")))?;
    }
    let format = match resolve::<String>(sub, &cfg, "format")?.as_str() {
        "json" => OutputFormat::Json,
        "csv" => OutputFormat::Csv,
        other => return Err(usage(format!("unknown format `{other}` (json or csv)"))),
    };
    let run = Run {
        seed,
        format,
        start: Instant::now(),
    };

    match name {
        "constants" => cmd_constants(sub, &cfg, &run),
        "eval" => cmd_eval(sub, &cfg, &run),
        "bmo" => cmd_bmo(sub, &cfg, &run),
        "verify" => cmd_verify(sub, &cfg, &run),
        "volume" => cmd_volume(sub, &cfg, &run),
        other => Err(usage(format!("unknown command `{other}`"))),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage(format!("missing required flag --{flag}")))
}

fn parse_f64_list(raw: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("--{flag}: `{}`: {e}", s.trim())))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

fn constant_family(label: &str) -> Result<ConstantFamily, CliError> {
    match label {
        "A" | "a" => Ok(ConstantFamily::A),
        "B" | "b" => Ok(ConstantFamily::B),
        "F" | "f" => Ok(ConstantFamily::F),
        other => Err(usage(format!("unknown constant family `{other}` (A, B or F)"))),
    }
}

fn phi_by_name(name: &str) -> Result<PhiSpec, CliError> {
    PhiSpec::builtin(name).ok_or_else(|| {
        usage(format!(
            "unknown weight `{name}` (unit-ball-indicator or gauge-gaussian)"
        ))
    })
}

struct ConstantRow {
    query_family: String,
    m: usize,
    n: usize,
    beta: f64,
    result: ConstantResult,
}

impl ConstantRow {
    fn json(&self, run: &Run) -> JsonObject {
        let mut o = JsonObject::new("constants");
        o.push("family", Value::Str(self.query_family.clone()));
        o.push("m", Value::U64(self.m as u64));
        o.push("n", Value::U64(self.n as u64));
        o.push("beta", Value::F64(self.beta));
        o.push("method", Value::Str(self.result.method.label().to_string()));
        match &self.result.status {
            ConstantStatus::Finite { value, error_bound } => {
                o.push("status", Value::Str("finite".into()));
                o.push("value", Value::F64(*value));
                o.push("error_bound", Value::F64(*error_bound));
                o.push("reason", Value::Null);
            }
            ConstantStatus::Divergent { reason } => {
                o.push("status", Value::Str("divergent".into()));
                o.push("value", Value::Null);
                o.push("error_bound", Value::Null);
                o.push("reason", Value::Str(reason.clone()));
            }
        }
        o.push("n_samples", Value::opt_u64(self.result.n_samples));
        o.push("truncated", Value::Bool(self.result.truncated));
        let _ = run;
        o
    }

    fn csv_row(&self, run: &Run) -> Vec<Value> {
        let (status, value, err, reason) = match &self.result.status {
            ConstantStatus::Finite { value, error_bound } => (
                "finite",
                Value::F64(*value),
                Value::F64(*error_bound),
                Value::Str(String::new()),
            ),
            ConstantStatus::Divergent { reason } => (
                "divergent",
                Value::Null,
                Value::Null,
                Value::Str(reason.clone()),
            ),
        };
        vec![
            Value::Str(self.query_family.clone()),
            Value::U64(self.m as u64),
            Value::U64(self.n as u64),
            Value::F64(self.beta),
            Value::Str(self.result.method.label().to_string()),
            Value::Str(status.into()),
            value,
            err,
            reason,
            Value::opt_u64(self.result.n_samples),
            Value::Bool(self.result.truncated),
            Value::U64(run.seed),
        ]
    }
}

const CONSTANTS_CSV_HEADER: &[&str] = &[
    "family",
    "m",
    "n",
    "beta",
    "method",
    "status",
    "value",
    "error_bound",
    "reason",
    "n_samples",
    "truncated",
    "seed",
];

fn cmd_constants(sub: &ArgMatches, cfg: &FileConfig, run: &Run) -> Result<i32, CliError> {
    let family_label: String = require(resolve_opt(sub, cfg, "family")?, "family")?;
    let family = constant_family(&family_label)?;
    let m: usize = require(resolve_opt(sub, cfg, "m")?, "m")?;
    let n: usize = resolve(sub, cfg, "n")?;
    let beta: f64 = require(resolve_opt(sub, cfg, "beta")?, "beta")?;
    let method: String = resolve(sub, cfg, "method")?;
    let samples: u64 = resolve(sub, cfg, "samples")?;
    let truncation: Option<f64> = resolve_opt(sub, cfg, "truncation")?;
    let tolerance: f64 = resolve(sub, cfg, "tolerance")?;
    let volume_method = match resolve::<String>(sub, cfg, "volume-method")?.as_str() {
        "measured" => VolumeMethod::Measured,
        "gamma-formula" => VolumeMethod::GammaFormula,
        other => return Err(usage(format!("unknown volume method `{other}`"))),
    };

    let query = match family {
        ConstantFamily::F => {
            let phi_name: String = resolve(sub, cfg, "phi")?;
            ConstantQuery::hausdorff(m, n, beta, phi_by_name(&phi_name)?)?
        }
        _ => ConstantQuery::new(family, m, n, beta)?,
    };

    let methods: Vec<&str> = match method.as_str() {
        "all" => vec!["closed", "quad", "mc"],
        one @ ("closed" | "quad" | "mc") => vec![one],
        other => return Err(usage(format!("unknown method `{other}`"))),
    };

    let mut rows: Vec<ConstantRow> = Vec::new();
    for meth in &methods {
        let result = match *meth {
            "closed" => closed_form(&query, volume_method)?,
            "quad" => quad_constant(&query, tolerance)?,
            "mc" => {
                let mut qc = QuadratureConfig::new(samples, run.stream());
                qc.truncation_radius = truncation;
                match mc_constant(&query, &qc) {
                    Ok(r) => r,
                    // A divergent Monte-Carlo request reports the analytic
                    // reason in the same shape as the other methods.
                    Err(HbmoError::DivergentIntegral { reason }) => ConstantResult {
                        status: ConstantStatus::Divergent { reason },
                        method: hbmo_core::constants::ConstantMethod::MonteCarlo,
                        n_samples: None,
                        truncated: truncation.is_some(),
                    },
                    Err(e) => return Err(e.into()),
                }
            }
            _ => unreachable!(),
        };
        rows.push(ConstantRow {
            query_family: family_label.clone(),
            m,
            n,
            beta,
            result,
        });
    }

    let mut agreement_fields: Vec<(String, bool)> = Vec::new();
    let mut all_agree = true;
    if methods.len() > 1 {
        for i in 0..rows.len() {
            for j in (i + 1)..rows.len() {
                let a = &rows[i];
                let b = &rows[j];
                let key = format!(
                    "{}_vs_{}",
                    a.result.method.label().replace('-', "_"),
                    b.result.method.label().replace('-', "_")
                );
                let ok = match (&a.result.status, &b.result.status) {
                    (
                        ConstantStatus::Finite {
                            value: va,
                            error_bound: ea,
                        },
                        ConstantStatus::Finite {
                            value: vb,
                            error_bound: eb,
                        },
                    ) => {
                        // Deterministic bounds add; Monte-Carlo stderr gets
                        // the usual 3 sigma.
                        let is_mc = |r: &ConstantRow| r.result.n_samples.is_some();
                        let slack = if is_mc(a) || is_mc(b) {
                            3.0 * (ea + eb)
                        } else {
                            2.0 * (ea + eb)
                        } + 1e-8 * va.abs().max(1.0);
                        (va - vb).abs() <= slack
                    }
                    (ConstantStatus::Divergent { .. }, ConstantStatus::Divergent { .. }) => true,
                    _ => false,
                };
                all_agree &= ok;
                agreement_fields.push((key, ok));
            }
        }
    }

    let any_divergent = rows
        .iter()
        .any(|r| matches!(r.result.status, ConstantStatus::Divergent { .. }));

    match run.format {
        OutputFormat::Json => {
            for row in &rows {
                run.emit(row.json(run));
            }
            if !agreement_fields.is_empty() {
                let mut o = JsonObject::new("constants");
                o.push("family", Value::Str(family_label.clone()));
                o.push("m", Value::U64(m as u64));
                o.push("n", Value::U64(n as u64));
                o.push("beta", Value::F64(beta));
                o.push("method", Value::Str("agreement".into()));
                for (key, ok) in &agreement_fields {
                    o.push(key, Value::Bool(*ok));
                }
                o.push("all_agree", Value::Bool(all_agree));
                run.emit(o);
            }
        }
        OutputFormat::Csv => {
            let table: Vec<Vec<Value>> = rows.iter().map(|r| r.csv_row(run)).collect();
            print_csv(CONSTANTS_CSV_HEADER, &table)
                .map_err(|e| CliError::Core(HbmoError::Internal(e.to_string())))?;
        }
    }

    if !all_agree {
        return Ok(3);
    }
    if any_divergent {
        return Ok(2);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn kernel_family(label: &str) -> Result<KernelFamily, CliError> {
    match label.to_ascii_lowercase().as_str() {
        "hlp" => Ok(KernelFamily::Hlp),
        "hilbert" => Ok(KernelFamily::Hilbert),
        "hausdorff" => Ok(KernelFamily::Hausdorff),
        other => Err(usage(format!(
            "unknown kernel family `{other}` (hlp, hilbert or hausdorff)"
        ))),
    }
}

fn cmd_eval(sub: &ArgMatches, cfg: &FileConfig, run: &Run) -> Result<i32, CliError> {
    let family_label: String = require(resolve_opt(sub, cfg, "family")?, "family")?;
    let family = kernel_family(&family_label)?;
    let m: usize = require(resolve_opt(sub, cfg, "m")?, "m")?;
    let beta: f64 = require(resolve_opt(sub, cfg, "beta")?, "beta")?;
    let functions_raw: String = require(resolve_opt(sub, cfg, "functions")?, "functions")?;
    let point_raw: String = require(resolve_opt(sub, cfg, "point")?, "point")?;
    let n: usize = resolve(sub, cfg, "n")?;
    let samples: u64 = resolve(sub, cfg, "samples")?;
    let truncation: Option<f64> = resolve_opt(sub, cfg, "truncation")?;

    let names: Vec<String> = functions_raw
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if names.len() != m {
        return Err(usage(format!(
            "--functions lists {} names but --m is {m}",
            names.len()
        )));
    }
    let fs: Vec<_> = names
        .iter()
        .map(|name| {
            corpus_lookup(name).ok_or_else(|| usage(format!("unknown corpus function `{name}`")))
        })
        .collect::<Result<_, _>>()?;

    let spec = match family {
        KernelFamily::Hausdorff => {
            let phi_name: String = resolve(sub, cfg, "phi")?;
            KernelSpec::hausdorff(m, beta, phi_by_name(&phi_name)?)?
        }
        _ => KernelSpec::new(family, m, beta)?,
    };

    let dim = GroupDimension::new(n)?;
    let coords = parse_f64_list(&point_raw, "point")?;
    let x = dim.point(coords.clone())?;
    let mut qc = QuadratureConfig::new(samples, run.stream());
    qc.truncation_radius = truncation;

    let mut o = JsonObject::new("eval");
    o.push("family", Value::Str(spec.family.label().to_string()));
    o.push("m", Value::U64(m as u64));
    o.push("n", Value::U64(n as u64));
    o.push("beta", Value::F64(beta));
    o.push("functions", Value::StrArray(names.clone()));
    o.push("point", Value::FloatArray(coords.clone()));

    match eval_operator(&spec, &dim, &fs, &x, &qc) {
        Ok(r) => {
            o.push("status", Value::Str("finite".into()));
            o.push("value", Value::F64(r.value));
            o.push("stderr", Value::F64(r.stderr));
            o.push("reason", Value::Null);
            o.push("n_samples", Value::U64(r.n_samples));
            o.push("truncated", Value::Bool(r.truncated));
            match run.format {
                OutputFormat::Json => run.emit(o),
                OutputFormat::Csv => {
                    let row = vec![
                        Value::Str(spec.family.label().to_string()),
                        Value::U64(m as u64),
                        Value::U64(n as u64),
                        Value::F64(beta),
                        Value::StrArray(names),
                        Value::FloatArray(coords),
                        Value::Str("finite".into()),
                        Value::F64(r.value),
                        Value::F64(r.stderr),
                        Value::Str(String::new()),
                        Value::U64(r.n_samples),
                        Value::Bool(r.truncated),
                        Value::U64(run.seed),
                    ];
                    print_csv(EVAL_CSV_HEADER, &[row])
                        .map_err(|e| CliError::Core(HbmoError::Internal(e.to_string())))?;
                }
            }
            Ok(0)
        }
        Err(HbmoError::DivergentIntegral { reason }) => {
            o.push("status", Value::Str("divergent".into()));
            o.push("value", Value::Null);
            o.push("stderr", Value::Null);
            o.push("reason", Value::Str(reason.clone()));
            o.push("n_samples", Value::Null);
            o.push("truncated", Value::Bool(truncation.is_some()));
            match run.format {
                OutputFormat::Json => run.emit(o),
                OutputFormat::Csv => {
                    let row = vec![
                        Value::Str(spec.family.label().to_string()),
                        Value::U64(m as u64),
                        Value::U64(n as u64),
                        Value::F64(beta),
                        Value::StrArray(names),
                        Value::FloatArray(coords),
                        Value::Str("divergent".into()),
                        Value::Null,
                        Value::Null,
                        Value::Str(reason),
                        Value::Null,
                        Value::Bool(truncation.is_some()),
                        Value::U64(run.seed),
                    ];
                    print_csv(EVAL_CSV_HEADER, &[row])
                        .map_err(|e| CliError::Core(HbmoError::Internal(e.to_string())))?;
                }
            }
            Ok(2)
        }
        Err(e) => Err(e.into()),
    }
}

const EVAL_CSV_HEADER: &[&str] = &[
    "family",
    "m",
    "n",
    "beta",
    "functions",
    "point",
    "status",
    "value",
    "stderr",
    "reason",
    "n_samples",
    "truncated",
    "seed",
];

// ---------------------------------------------------------------------------
// bmo
// ---------------------------------------------------------------------------

fn cmd_bmo(sub: &ArgMatches, cfg: &FileConfig, run: &Run) -> Result<i32, CliError> {
    let fname: String = require(resolve_opt(sub, cfg, "function")?, "function")?;
    let f = corpus_lookup(&fname)
        .ok_or_else(|| usage(format!("unknown corpus function `{fname}`")))?;
    let n: usize = resolve(sub, cfg, "n")?;
    let per_ball: u64 = resolve(sub, cfg, "per-ball-samples")?;
    let radii_raw: Option<String> = resolve_opt(sub, cfg, "radii")?;
    let centers_choice: String = resolve(sub, cfg, "centers")?;

    let dim = GroupDimension::new(n)?;
    let stream = run.stream();
    let mut grid = default_grid(&dim, per_ball, &stream.substream(1))?;
    if let Some(raw) = radii_raw {
        grid.radii = parse_f64_list(&raw, "radii")?;
    }
    match centers_choice.as_str() {
        "default" => {}
        "identity" => grid.centers = vec![dim.identity()],
        other => return Err(usage(format!("unknown centers choice `{other}`"))),
    }
    let grid = BallGrid {
        per_ball_samples: per_ball,
        ..grid
    };

    let est = bmo_seminorm_lb(&f, &dim, &grid, &stream.substream(2))?;

    match run.format {
        OutputFormat::Json => {
            for row in &est.per_ball_table {
                let mut o = JsonObject::new("bmo-ball");
                o.push("function", Value::Str(fname.clone()));
                o.push(
                    "center",
                    Value::FloatArray(row.ball.center.coords().to_vec()),
                );
                o.push("radius", Value::F64(row.ball.radius));
                o.push("oscillation", Value::F64(row.oscillation));
                o.push("stderr", Value::F64(row.stderr));
                o.push("n_samples", Value::U64(row.n_samples));
                run.emit(o);
            }
            let mut o = JsonObject::new("bmo");
            o.push("function", Value::Str(fname.clone()));
            o.push("n", Value::U64(n as u64));
            o.push("lower_bound", Value::F64(est.lower_bound));
            o.push("stderr", Value::F64(est.stderr));
            o.push(
                "argmax_center",
                Value::FloatArray(est.argmax_ball.center.coords().to_vec()),
            );
            o.push("argmax_radius", Value::F64(est.argmax_ball.radius));
            o.push("n_balls", Value::U64(est.per_ball_table.len() as u64));
            o.push("per_ball_samples", Value::U64(per_ball));
            o.push(
                "integrability_warning",
                Value::Bool(est.integrability_warning),
            );
            run.emit(o);
        }
        OutputFormat::Csv => {
            let coord_len = dim.coords_len();
            let center_headers: Vec<String> =
                (0..coord_len).map(|i| format!("center_{i}")).collect();
            let mut header: Vec<&str> = center_headers.iter().map(|s| s.as_str()).collect();
            header.extend(["radius", "oscillation", "stderr", "n_samples"]);
            let rows: Vec<Vec<Value>> = est
                .per_ball_table
                .iter()
                .map(|row| {
                    let mut cells: Vec<Value> = row
                        .ball
                        .center
                        .coords()
                        .iter()
                        .map(|c| Value::F64(*c))
                        .collect();
                    cells.push(Value::F64(row.ball.radius));
                    cells.push(Value::F64(row.oscillation));
                    cells.push(Value::F64(row.stderr));
                    cells.push(Value::U64(row.n_samples));
                    cells
                })
                .collect();
            print_csv(&header, &rows)
                .map_err(|e| CliError::Core(HbmoError::Internal(e.to_string())))?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn report_json(suite: &str, rep: &VerificationReport, asserting: bool) -> JsonObject {
    let mut o = JsonObject::new("verify");
    o.push("suite", Value::Str(suite.to_string()));
    o.push("check", Value::Str(rep.check_name.clone()));
    o.push("lhs", Value::F64(rep.lhs.0));
    o.push("lhs_stderr", Value::F64(rep.lhs.1));
    o.push("rhs", Value::F64(rep.rhs.0));
    o.push("rhs_stderr", Value::F64(rep.rhs.1));
    o.push("agreement", Value::Bool(rep.agreement));
    o.push("asserting", Value::Bool(asserting));
    o.push("notes", Value::Str(rep.notes.clone()));
    o
}

const VERIFY_CSV_HEADER: &[&str] = &[
    "suite",
    "check",
    "lhs",
    "lhs_stderr",
    "rhs",
    "rhs_stderr",
    "agreement",
    "asserting",
    "seed",
    "notes",
];

fn cmd_verify(sub: &ArgMatches, cfg: &FileConfig, run: &Run) -> Result<i32, CliError> {
    let suite: String = resolve(sub, cfg, "suite")?;
    let n: usize = resolve(sub, cfg, "n")?;
    let samples: u64 = resolve(sub, cfg, "samples")?;
    let point_samples: u64 = resolve(sub, cfg, "point-samples")?;

    let dim = GroupDimension::new(n)?;
    let stream = run.stream();

    // (suite name, report, does it gate the exit status)
    let mut gathered: Vec<(&str, VerificationReport, bool)> = Vec::new();
    let want = |name: &str| suite == name || suite == "all";
    if want("identities") {
        for rep in suite_identities(&dim, &stream.substream(10), samples)? {
            gathered.push(("identities", rep, true));
        }
    }
    if want("bounds") {
        for rep in suite_bounds(&dim, &stream.substream(20), point_samples)? {
            gathered.push(("bounds", rep, true));
        }
    }
    if want("extremal") {
        // The extremal probe reports the formal prediction side by side but
        // never gates the exit status.
        for rep in suite_extremal(&dim, &stream.substream(30), samples)? {
            gathered.push(("extremal", rep, false));
        }
    }
    if gathered.is_empty() {
        return Err(usage(format!("unknown suite `{suite}`")));
    }

    match run.format {
        OutputFormat::Json => {
            for (suite_name, rep, asserting) in &gathered {
                run.emit(report_json(suite_name, rep, *asserting));
            }
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<Value>> = gathered
                .iter()
                .map(|(suite_name, rep, asserting)| {
                    vec![
                        Value::Str(suite_name.to_string()),
                        Value::Str(rep.check_name.clone()),
                        Value::F64(rep.lhs.0),
                        Value::F64(rep.lhs.1),
                        Value::F64(rep.rhs.0),
                        Value::F64(rep.rhs.1),
                        Value::Bool(rep.agreement),
                        Value::Bool(*asserting),
                        Value::U64(rep.seed),
                        Value::Str(rep.notes.replace('\n', "; ")),
                    ]
                })
                .collect();
            print_csv(VERIFY_CSV_HEADER, &rows)
                .map_err(|e| CliError::Core(HbmoError::Internal(e.to_string())))?;
        }
    }

    let all_ok = gathered
        .iter()
        .all(|(_, rep, asserting)| !asserting || rep.agreement);
    Ok(if all_ok { 0 } else { 3 })
}

// ---------------------------------------------------------------------------
// volume
// ---------------------------------------------------------------------------

fn cmd_volume(sub: &ArgMatches, cfg: &FileConfig, run: &Run) -> Result<i32, CliError> {
    let n: usize = resolve(sub, cfg, "n")?;
    let radius: f64 = resolve(sub, cfg, "radius")?;
    let method: String = resolve(sub, cfg, "method")?;
    let samples: u64 = resolve(sub, cfg, "samples")?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(usage(format!("--radius must be positive, got {radius}")));
    }

    let dim = GroupDimension::new(n)?;
    let q = dim.q();
    let scale = radius.powf(q);
    let measured = unit_ball_volume(n, VolumeMethod::Measured)? * scale;
    let gamma_formula = unit_ball_volume(n, VolumeMethod::GammaFormula)? * scale;

    let (value, stderr, n_samples) = match method.as_str() {
        "measured" => (measured, None, None),
        "gamma-formula" => (gamma_formula, None, None),
        "mc" => {
            // Uniform box [-r, r]^{2n} x [-r^2, r^2] around the gauge ball;
            // the estimate is box volume times the hit fraction, accumulated
            // with the deterministic chunked runner.
            let k = 2 * n;
            let box_vol = 2f64.powi(k as i32 + 1) * radius.powi(k as i32 + 2);
            let r2 = radius * radius;
            let r4 = r2 * r2;
            let stats = mc_run(&run.stream(), samples, DEFAULT_CHUNK, |rng| {
                use rand::Rng;
                let mut h = 0.0;
                for _ in 0..k {
                    let c: f64 = rng.gen_range(-radius..radius);
                    h += c * c;
                }
                let t: f64 = rng.gen_range(-r2..r2);
                if h * h + t * t <= r4 {
                    1.0
                } else {
                    0.0
                }
            });
            (
                box_vol * stats.mean(),
                Some(box_vol * stats.stderr()),
                Some(samples),
            )
        }
        other => return Err(usage(format!("unknown volume method `{other}`"))),
    };

    let discrepancy = (gamma_formula / measured - 1.0).abs() > 1e-9;
    let method_label = method.clone();

    match run.format {
        OutputFormat::Json => {
            let mut o = JsonObject::new("volume");
            o.push("n", Value::U64(n as u64));
            o.push("radius", Value::F64(radius));
            o.push("method", Value::Str(method_label));
            o.push("value", Value::F64(value));
            o.push("stderr", Value::opt_f64(stderr));
            o.push("n_samples", Value::opt_u64(n_samples));
            o.push("measured_value", Value::F64(measured));
            o.push("gamma_formula_value", Value::F64(gamma_formula));
            o.push("discrepancy_warning", Value::Bool(discrepancy));
            run.emit(o);
        }
        OutputFormat::Csv => {
            let row = vec![
                Value::U64(n as u64),
                Value::F64(radius),
                Value::Str(method_label),
                Value::F64(value),
                Value::opt_f64(stderr),
                Value::opt_u64(n_samples),
                Value::F64(measured),
                Value::F64(gamma_formula),
                Value::Bool(discrepancy),
                Value::U64(run.seed),
            ];
            print_csv(
                &[
                    "n",
                    "radius",
                    "method",
                    "value",
                    "stderr",
                    "n_samples",
                    "measured_value",
                    "gamma_formula_value",
                    "discrepancy_warning",
                    "seed",
                ],
                &[row],
            )
            .map_err(|e| CliError::Core(HbmoError::Internal(e.to_string())))?;
        }
    }
    Ok(0)
}
