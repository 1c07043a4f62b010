//! The `ncq` command line: config loading, dispatch and report writing.
//!
//! Exit codes: 0 when the job passes (or its feasibility verdict is
//! feasible), 1 when it fails, 2 on usage or config errors.

mod config;
mod runners;

pub use config::{
    echo, validate_config, AlgebraCheckJob, BasisSpec, ConfigError, ContextConfig, JobConfig, JobKind, MarginalConfig,
    MomentsJob, PcpJob, PinConfig, PresentationRef, QuantizeJob, ReplicaJob, SweepJob, TwoslitJob, ValidatedConfig,
    WignerJob,
};
pub use runners::{run_job, JobOutcome};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL: &str = "ncq";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Report written for every job. Field order is fixed; wall-clock timing is
/// printed to stdout only, so identical inputs give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub job: String,
    pub passed: bool,
    pub config: Value,
    pub warnings: Vec<String>,
    pub result: Value,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Parser, Debug)]
#[command(name = "ncq", version, about = "Contextual quantization workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON config file
    config: Option<PathBuf>,
    /// Report path (CSV for wigner and sweep unless it ends in .json)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relaxation degree d (basis words of length ≤ d)
    #[arg(long)]
    degree: Option<usize>,
    /// Feasibility tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Print a machine-readable summary instead of the human one
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone, Default)]
struct Ensemble {
    #[arg(long = "trials")]
    trials: Option<usize>,
    /// real_symmetric or complex_hermitian
    #[arg(long)]
    ensemble: Option<String>,
    /// Finite-N allowance added to the 3-stderr band
    #[arg(long = "bias-allowance")]
    bias_allowance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a presentation and reduce expressions to normal form
    AlgebraCheck(Common),
    /// Evaluate a state on expressions
    Moments(Common),
    /// Unify context moments into one positive state, or certify that none exists
    Pcp(Common),
    /// Run every check of a contextual quantization
    Quantize(Common),
    /// Density matrix with prescribed measurement marginals
    Twoslit(Common),
    /// Normalized trace moments of a Wigner ensemble (CSV)
    Wigner {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Mixed trace moment of independent replicas
    Replica {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        /// Comma-separated complex coefficients c_a
        #[arg(long)]
        coefficients: Option<String>,
        /// Replica labels and Δ, e.g. "0,0,1,1" or "D,D"
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Trace moments over increasing N (CSV)
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ensemble: Ensemble,
        /// Comma-separated matrix sizes
        #[arg(long = "Ns")]
        ns: Option<String>,
        #[arg(long)]
        kmax: Option<usize>,
    },
}

struct Usage(String);

fn set(doc: &mut Value, key: &str, value: Value) {
    if let Value::Object(map) = doc {
        map.insert(key.to_string(), value);
    }
}

fn set_tol(doc: &mut Value, tol: f64) {
    if let Value::Object(map) = doc {
        let options = map.entry("options").or_insert_with(|| json!({}));
        if let Value::Object(o) = options {
            o.insert("tol".into(), json!(tol));
        }
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, Usage> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Usage(format!("invalid value `{s}` for {flag}"))))
        .collect()
}

fn load_document(path: Option<&Path>) -> Result<(Value, PathBuf), Usage> {
    match path {
        None => Ok((json!({}), PathBuf::from("."))),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Usage(format!("cannot read {}: {e}", p.display())))?;
            let doc: Value =
                serde_json::from_str(&text).map_err(|e| Usage(format!("{} is not valid JSON: {e}", p.display())))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((doc, if base.as_os_str().is_empty() { PathBuf::from(".") } else { base }))
        }
    }
}

/// Applies common flags; rejects those the job ignores.
fn apply_common(doc: &mut Value, kind: JobKind, c: &Common) -> Result<(), Usage> {
    if let Some(seed) = c.seed {
        if !kind.is_stochastic() {
            return Err(Usage(format!("--seed does not apply to `{}`", kind.as_str())));
        }
        set(doc, "seed", json!(seed));
    }
    if let Some(d) = c.degree {
        if !matches!(kind, JobKind::Pcp | JobKind::Quantize) {
            return Err(Usage(format!("--degree does not apply to `{}`", kind.as_str())));
        }
        set(doc, "degree", json!(d));
    }
    if let Some(tol) = c.tol {
        if !matches!(kind, JobKind::Pcp | JobKind::Quantize | JobKind::Twoslit) {
            return Err(Usage(format!("--tol does not apply to `{}`", kind.as_str())));
        }
        set_tol(doc, tol);
    }
    Ok(())
}

fn apply_ensemble(doc: &mut Value, e: &Ensemble) {
    if let Some(t) = e.trials {
        set(doc, "trials", json!(t));
    }
    if let Some(name) = &e.ensemble {
        set(doc, "ensemble", json!(name));
    }
    if let Some(b) = e.bias_allowance {
        set(doc, "bias_allowance", json!(b));
    }
}

/// Resolves the subcommand into a job kind and a config document with flag
/// overrides applied.
fn prepare(command: &Command) -> Result<(JobKind, Common, Value, PathBuf), Usage> {
    let (kind, common) = match command {
        Command::AlgebraCheck(c) => (JobKind::AlgebraCheck, c),
        Command::Moments(c) => (JobKind::Moments, c),
        Command::Pcp(c) => (JobKind::Pcp, c),
        Command::Quantize(c) => (JobKind::Quantize, c),
        Command::Twoslit(c) => (JobKind::Twoslit, c),
        Command::Wigner { common, .. } => (JobKind::Wigner, common),
        Command::Replica { common, .. } => (JobKind::Replica, common),
        Command::Sweep { common, .. } => (JobKind::Sweep, common),
    };
    let (mut doc, base) = load_document(common.config.as_deref())?;
    if !doc.is_object() {
        return Err(Usage("config must be a JSON object".into()));
    }
    apply_common(&mut doc, kind, common)?;
    match command {
        Command::Wigner { ensemble, n, kmax, .. } => {
            apply_ensemble(&mut doc, ensemble);
            if let Some(n) = n {
                set(&mut doc, "N", json!(n));
            }
            if let Some(k) = kmax {
                set(&mut doc, "kmax", json!(k));
            }
        }
        Command::Replica {
            ensemble,
            n,
            replicas,
            coefficients,
            pattern,
            ..
        } => {
            apply_ensemble(&mut doc, ensemble);
            if let Some(n) = n {
                set(&mut doc, "N", json!(n));
            }
            if let Some(p) = replicas {
                set(&mut doc, "replicas", json!(p));
            }
            if let Some(text) = coefficients {
                let values: Vec<Value> = text
                    .split(',')
                    .map(|s| json!(s.trim()))
                    .collect();
                set(&mut doc, "coefficients", Value::Array(values));
            }
            if let Some(p) = pattern {
                set(&mut doc, "pattern", json!(p));
            }
        }
        Command::Sweep { ensemble, ns, kmax, .. } => {
            if ensemble.bias_allowance.is_some() {
                return Err(Usage("--bias-allowance does not apply to `sweep`".into()));
            }
            apply_ensemble(&mut doc, ensemble);
            if let Some(text) = ns {
                let values: Vec<usize> = parse_list("--Ns", text)?;
                set(&mut doc, "Ns", json!(values));
            }
            if let Some(k) = kmax {
                set(&mut doc, "kmax", json!(k));
            }
        }
        _ => {}
    }
    Ok((kind, common.clone(), doc, base))
}

/// A finished job: its report, the CSV body for table jobs and a one-line
/// human summary.
#[derive(Clone, Debug)]
pub struct Execution {
    pub report: RunReport,
    pub csv: Option<String>,
    pub summary: String,
}

/// Validates and runs one job document.
pub fn execute(document: &Value, kind: JobKind, base: &Path) -> Result<Execution, String> {
    let validated = validate_config(document, kind, base).map_err(|e| e.to_string())?;
    let outcome = run_job(&validated)?;
    let report = RunReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        job: kind.as_str().into(),
        passed: outcome.passed,
        config: echo(&validated.job),
        warnings: validated.warnings.clone(),
        result: outcome.result,
    };
    Ok(Execution {
        report,
        csv: outcome.csv,
        summary: outcome.summary,
    })
}

fn write_file(path: &Path, body: &str) -> Result<(), String> {
    std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Entry point of the `ncq` binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let (kind, common, doc, base) = match prepare(&cli.command) {
        Ok(v) => v,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    let Execution { report, csv, summary } = match execute(&doc, kind, &base) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let code = if report.passed { EXIT_PASS } else { EXIT_FAIL };

    if let Some(out) = &common.out {
        let wants_json = out.extension().is_some_and(|e| e == "json");
        let body = match (&csv, wants_json) {
            (Some(table), false) => table.clone(),
            _ => report.to_json(),
        };
        if let Err(msg) = write_file(out, &body) {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    }

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if common.json {
        let summary = json!({
            "job": report.job,
            "passed": report.passed,
            "exit_code": code,
            "warnings": report.warnings,
            "elapsed_seconds": elapsed,
            "out": common.out.as_ref().map(|p| p.display().to_string()),
        });
        let _ = writeln!(lock, "{summary}");
    } else {
        let _ = writeln!(lock, "ncq {}: {}", report.job, if report.passed { "PASS" } else { "FAIL" });
        let _ = writeln!(lock, "  {summary}");
        for w in &report.warnings {
            let _ = writeln!(lock, "  warning: {w}");
        }
        if let Some(out) = &common.out {
            let _ = writeln!(lock, "  wrote {}", out.display());
        }
        let _ = writeln!(lock, "  elapsed {elapsed:.3} s");
    }
    code
}
