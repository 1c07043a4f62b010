//! Job configuration documents: typed schemas, defaulting and validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::algebra::{parse_presentation, ClassTag, Presentation};
use crate::complex_value::ComplexValue;
use crate::context::{CorrespondenceMode, GenerationMode};
use crate::feasibility::FeasibilityOptions;
use crate::state::StateSpec;
use crate::wigner::Ensemble;

/// A schema violation, located by JSON path.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    AlgebraCheck,
    Moments,
    Pcp,
    Quantize,
    Twoslit,
    Wigner,
    Replica,
    Sweep,
}

impl JobKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JobKind::AlgebraCheck => "algebra_check",
            JobKind::Moments => "moments",
            JobKind::Pcp => "pcp",
            JobKind::Quantize => "quantize",
            JobKind::Twoslit => "twoslit",
            JobKind::Wigner => "wigner",
            JobKind::Replica => "replica",
            JobKind::Sweep => "sweep",
        }
    }

    pub fn parse(text: &str) -> Option<JobKind> {
        serde_json::from_value(Value::String(text.replace('-', "_"))).ok()
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, JobKind::Wigner | JobKind::Replica | JobKind::Sweep)
    }
}

/// A presentation given inline (one string or a list of lines) or by file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PresentationRef {
    Text(String),
    Lines(Vec<String>),
    File { file: String },
}

impl PresentationRef {
    /// Loads and parses the presentation; returns it with its source text.
    pub fn resolve(&self, base: &Path, path: &str) -> Result<(Presentation, String), ConfigError> {
        let text = match self {
            PresentationRef::Text(t) => t.clone(),
            PresentationRef::Lines(lines) => lines.join("\n"),
            PresentationRef::File { file } => {
                let full = base.join(file);
                std::fs::read_to_string(&full).map_err(|e| {
                    ConfigError::new(format!("{path}.file"), format!("cannot read {}: {e}", full.display()))
                })?
            }
        };
        let pres = parse_presentation(&text).map_err(|e| ConfigError::new(path, e.to_string()))?;
        Ok((pres, text))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraCheckJob {
    pub presentation: PresentationRef,
    #[serde(default)]
    pub expressions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsJob {
    pub presentation: PresentationRef,
    pub state: StateSpec,
    pub expressions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub source: PresentationRef,
    /// Source generator → image expression over the target.
    pub map: BTreeMap<String, String>,
    pub state: StateSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinConfig {
    pub expression: String,
    pub value: ComplexValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcpJob {
    pub target: PresentationRef,
    #[serde(default)]
    pub contexts: Vec<ContextConfig>,
    #[serde(default)]
    pub pins: Vec<PinConfig>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub options: FeasibilityOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizeJob {
    pub target: PresentationRef,
    pub contexts: Vec<ContextConfig>,
    pub target_state: StateSpec,
    #[serde(default)]
    pub mode: Option<CorrespondenceMode>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub generation: GenerationMode,
    #[serde(default)]
    pub options: FeasibilityOptions,
}

/// A measurement basis: `z`/`computational`, `x`/`hadamard`, `y`, or explicit
/// rows of a unitary whose columns are the basis vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Named(String),
    Matrix(Vec<Vec<ComplexValue>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalConfig {
    pub basis: BasisSpec,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoslitJob {
    #[serde(default)]
    pub dimension: Option<usize>,
    pub marginals: Vec<MarginalConfig>,
    #[serde(default)]
    pub options: FeasibilityOptions,
}

fn default_kmax() -> usize {
    4
}

fn default_trials() -> usize {
    50
}

fn default_replicas() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerJob {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Finite-N allowance added to the 3-stderr band; defaults to 2/N.
    #[serde(default)]
    pub bias_allowance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaJob {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub coefficients: Vec<ComplexValue>,
    pub pattern: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub bias_allowance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepJob {
    #[serde(rename = "Ns")]
    pub ns: Vec<usize>,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A validated job, defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub enum JobConfig {
    AlgebraCheck(AlgebraCheckJob),
    Moments(MomentsJob),
    Pcp(PcpJob),
    Quantize(QuantizeJob),
    Twoslit(TwoslitJob),
    Wigner(WignerJob),
    Replica(ReplicaJob),
    Sweep(SweepJob),
}

/// Validation result: the job, the echo of its resolved form and warnings.
#[derive(Clone, Debug)]
pub struct ValidatedConfig {
    pub kind: JobKind,
    pub job: JobConfig,
    /// Directory that relative `file` references resolve against.
    pub base: PathBuf,
    pub warnings: Vec<String>,
}

fn typed<T: DeserializeOwned>(value: &Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value.clone()).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path.is_empty() { ".".into() } else { path }, e.into_inner().to_string())
    })
}

/// Keys present in `input` but absent from the resolved echo.
fn unknown_keys(input: &Value, echo: &Value, path: &str, out: &mut Vec<String>) {
    match (input, echo) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in a {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get(k) {
                    Some(w) => unknown_keys(v, w, &here, out),
                    None if k == "job" && path.is_empty() => {}
                    None => out.push(format!("unknown key `{here}` ignored")),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

fn degree_for(class: ClassTag) -> usize {
    if class == ClassTag::Commutative {
        3
    } else {
        2
    }
}

fn resolve_presentation(r: &mut PresentationRef, base: &Path, path: &str) -> Result<Presentation, ConfigError> {
    let (pres, text) = r.resolve(base, path)?;
    *r = PresentationRef::Text(text);
    Ok(pres)
}

fn check_seed(seed: Option<u64>) -> Result<(), ConfigError> {
    match seed {
        Some(_) => Ok(()),
        None => Err(ConfigError::new("seed", "missing required field `seed` for a stochastic job")),
    }
}

fn check_options(o: &FeasibilityOptions) -> Result<(), ConfigError> {
    if !(o.tol > 0.0) {
        return Err(ConfigError::new("options.tol", "must be positive"));
    }
    if o.max_iter == 0 {
        return Err(ConfigError::new("options.max_iter", "must be positive"));
    }
    if o.stall_window == 0 {
        return Err(ConfigError::new("options.stall_window", "must be positive"));
    }
    Ok(())
}

/// Parses a config document for `kind`, fills defaults, inlines referenced
/// presentation files and lists unknown keys as warnings.
pub fn validate_config(document: &Value, kind: JobKind, base: &Path) -> Result<ValidatedConfig, ConfigError> {
    let Value::Object(map) = document else {
        return Err(ConfigError::new(".", "config must be a JSON object"));
    };
    if let Some(job) = map.get("job") {
        match job.as_str().and_then(JobKind::parse) {
            Some(k) if k == kind => {}
            Some(k) => {
                return Err(ConfigError::new(
                    "job",
                    format!("config is for `{}`, not `{}`", k.as_str(), kind.as_str()),
                ))
            }
            None => return Err(ConfigError::new("job", format!("unknown job kind {job}"))),
        }
    }
    let job = match kind {
        JobKind::AlgebraCheck => {
            let mut j: AlgebraCheckJob = typed(document)?;
            resolve_presentation(&mut j.presentation, base, "presentation")?;
            JobConfig::AlgebraCheck(j)
        }
        JobKind::Moments => {
            let mut j: MomentsJob = typed(document)?;
            resolve_presentation(&mut j.presentation, base, "presentation")?;
            j.state.validate().map_err(|e| ConfigError::new("state", e.to_string()))?;
            JobConfig::Moments(j)
        }
        JobKind::Pcp => {
            let mut j: PcpJob = typed(document)?;
            let target = resolve_presentation(&mut j.target, base, "target")?;
            resolve_contexts(&mut j.contexts, base)?;
            j.degree = Some(j.degree.unwrap_or_else(|| degree_for(target.class())));
            check_degree(j.degree)?;
            check_options(&j.options)?;
            JobConfig::Pcp(j)
        }
        JobKind::Quantize => {
            let mut j: QuantizeJob = typed(document)?;
            let target = resolve_presentation(&mut j.target, base, "target")?;
            resolve_contexts(&mut j.contexts, base)?;
            if j.contexts.is_empty() {
                return Err(ConfigError::new("contexts", "at least one context is required"));
            }
            j.degree = Some(j.degree.unwrap_or_else(|| degree_for(target.class())));
            check_degree(j.degree)?;
            let mode = j.mode.take().unwrap_or(match j.target_state {
                StateSpec::GibbsOscillator { .. } => CorrespondenceMode::Limit {
                    schedule: crate::context::default_schedule(),
                    tolerance: 5e-3,
                },
                _ => CorrespondenceMode::Exact,
            });
            mode.validate().map_err(|e| ConfigError::new("mode", e.to_string()))?;
            j.mode = Some(mode);
            j.target_state
                .validate()
                .map_err(|e| ConfigError::new("target_state", e.to_string()))?;
            check_options(&j.options)?;
            JobConfig::Quantize(j)
        }
        JobKind::Twoslit => {
            let mut j: TwoslitJob = typed(document)?;
            let n = match (j.dimension, j.marginals.first()) {
                (Some(n), _) => n,
                (None, Some(m)) => m.probabilities.len(),
                (None, None) => return Err(ConfigError::new("marginals", "at least one marginal is required")),
            };
            j.dimension = Some(n);
            check_options(&j.options)?;
            JobConfig::Twoslit(j)
        }
        JobKind::Wigner => {
            let mut j: WignerJob = typed(document)?;
            check_seed(j.seed)?;
            j.bias_allowance = Some(j.bias_allowance.unwrap_or(2.0 / j.n.max(1) as f64));
            JobConfig::Wigner(j)
        }
        JobKind::Replica => {
            let mut j: ReplicaJob = typed(document)?;
            check_seed(j.seed)?;
            if j.coefficients.is_empty() {
                j.coefficients = vec![ComplexValue::real(1.0); j.replicas];
            }
            j.bias_allowance = Some(j.bias_allowance.unwrap_or(2.0 / j.n.max(1) as f64));
            JobConfig::Replica(j)
        }
        JobKind::Sweep => {
            let j: SweepJob = typed(document)?;
            check_seed(j.seed)?;
            JobConfig::Sweep(j)
        }
    };
    let mut warnings = Vec::new();
    unknown_keys(document, &echo(&job), "", &mut warnings);
    Ok(ValidatedConfig {
        kind,
        job,
        base: base.to_path_buf(),
        warnings,
    })
}

fn check_degree(d: Option<usize>) -> Result<(), ConfigError> {
    match d {
        Some(0) => Err(ConfigError::new("degree", "must be at least 1")),
        _ => Ok(()),
    }
}

fn resolve_contexts(contexts: &mut [ContextConfig], base: &Path) -> Result<(), ConfigError> {
    for (i, c) in contexts.iter_mut().enumerate() {
        resolve_presentation(&mut c.source, base, &format!("contexts[{i}].source"))?;
        c.state
            .validate()
            .map_err(|e| ConfigError::new(format!("contexts[{i}].state"), e.to_string()))?;
        if c.label.is_none() {
            c.label = Some(format!("context{i}"));
        }
    }
    Ok(())
}

/// The resolved config as JSON, with the job kind first.
pub fn echo(job: &JobConfig) -> Value {
    let (kind, body) = match job {
        JobConfig::AlgebraCheck(j) => (JobKind::AlgebraCheck, serde_json::to_value(j)),
        JobConfig::Moments(j) => (JobKind::Moments, serde_json::to_value(j)),
        JobConfig::Pcp(j) => (JobKind::Pcp, serde_json::to_value(j)),
        JobConfig::Quantize(j) => (JobKind::Quantize, serde_json::to_value(j)),
        JobConfig::Twoslit(j) => (JobKind::Twoslit, serde_json::to_value(j)),
        JobConfig::Wigner(j) => (JobKind::Wigner, serde_json::to_value(j)),
        JobConfig::Replica(j) => (JobKind::Replica, serde_json::to_value(j)),
        JobConfig::Sweep(j) => (JobKind::Sweep, serde_json::to_value(j)),
    };
    let mut out = serde_json::Map::new();
    out.insert("job".into(), Value::String(kind.as_str().into()));
    if let Ok(Value::Object(body)) = body {
        out.extend(body);
    }
    Value::Object(out)
}
