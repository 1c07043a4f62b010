//! Executes validated jobs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{normal_form_with, parse_expression, Presentation, RewriteStrategy};
use crate::context::{check_context_compatibility, contextual_quantization_verify, ContextMap};
use crate::feasibility::{density_marginal_feasible, pcp_check, FeasibilityVerdict, LinearPin, Marginal, Witness};
use crate::state::{moment_report, StateSpec};
use crate::wigner::{
    convergence_sweep, estimate_trace_moments, fock_prediction, parse_pattern, replica_moment_experiment, sweep_csv,
    EnsembleConfig, SweepRow,
};

use super::config::{BasisSpec, ContextConfig, JobConfig, MarginalConfig, PresentationRef, ValidatedConfig};

/// Moments up to this order are held to the acceptance band.
const BAND_MAX_K: usize = 6;

/// What a job produced.
#[derive(Clone, Debug)]
pub struct JobOutcome {
    pub passed: bool,
    pub result: Value,
    /// One-line human summary.
    pub summary: String,
    /// CSV body for table-producing jobs.
    pub csv: Option<String>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn presentation(r: &PresentationRef) -> Result<Presentation, String> {
    // resolved configs always carry inline text
    let base = std::path::Path::new(".");
    r.resolve(base, "presentation").map(|(p, _)| p).map_err(|e| e.to_string())
}

fn build_contexts(target: &Presentation, contexts: &[ContextConfig]) -> Result<Vec<(ContextMap, StateSpec)>, String> {
    contexts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let source = presentation(&c.source)?;
            let label = c.label.clone().unwrap_or_else(|| format!("context{i}"));
            let f = ContextMap::from_text(label, &source, target, &c.map).map_err(|e| format!("contexts[{i}]: {e}"))?;
            Ok((f, c.state.clone()))
        })
        .collect()
}

pub fn run_job(config: &ValidatedConfig) -> Result<JobOutcome, String> {
    match &config.job {
        JobConfig::AlgebraCheck(j) => {
            let pres = presentation(&j.presentation)?;
            let mut rows = Vec::new();
            let mut agree = true;
            for text in &j.expressions {
                let x = parse_expression(text, &pres).map_err(|e| format!("`{text}`: {e}"))?;
                let left = normal_form_with(&x, &pres, RewriteStrategy::Leftmost).map_err(|e| e.to_string())?;
                let right = normal_form_with(&x, &pres, RewriteStrategy::Rightmost).map_err(|e| e.to_string())?;
                let diff = left.sub(&right).map_err(|e| e.to_string())?.max_abs_coefficient();
                agree &= diff <= 1e-12;
                rows.push(json!({
                    "expression": text,
                    "normal_form": pres.poly_to_string(&left),
                    "words": left.len(),
                    "strategies_agree": diff <= 1e-12,
                }));
            }
            let generators: Vec<String> = pres.generators().iter().map(|g| g.name.clone()).collect();
            Ok(JobOutcome {
                passed: agree,
                summary: format!(
                    "{} presentation with {} generators and {} rules; {} expressions reduced, strategies {}",
                    pres.class().as_str(),
                    generators.len(),
                    pres.rules().len(),
                    rows.len(),
                    if agree { "agree" } else { "DISAGREE" }
                ),
                result: json!({
                    "class": pres.class().as_str(),
                    "fingerprint": pres.fingerprint(),
                    "generators": generators,
                    "rules": pres.rules().len(),
                    "canonical": pres.to_dsl(),
                    "reductions": rows,
                }),
                csv: None,
            })
        }
        JobConfig::Moments(j) => {
            let pres = presentation(&j.presentation)?;
            let report = moment_report(&j.state, &pres, &j.expressions).map_err(|e| e.to_string())?;
            let lines: Vec<String> = report
                .entries
                .iter()
                .map(|e| format!("{} = {}", e.expression, crate::algebra::format_complex(e.value.0)))
                .collect();
            Ok(JobOutcome {
                passed: true,
                summary: lines.join("; "),
                result: to_value(&report),
                csv: None,
            })
        }
        JobConfig::Pcp(j) => {
            let target = presentation(&j.target)?;
            let family = build_contexts(&target, &j.contexts)?;
            let mut pins = Vec::new();
            for (i, p) in j.pins.iter().enumerate() {
                let form = parse_expression(&p.expression, &target).map_err(|e| format!("pins[{i}]: {e}"))?;
                pins.push((format!("pin{i}"), LinearPin { form, value: p.value.0 }));
            }
            let d = j.degree.expect("defaulted");
            let report = pcp_check(&target, &family, &pins, d, &j.options).map_err(|e| e.to_string())?;
            Ok(JobOutcome {
                passed: report.verdict.is_feasible(),
                summary: format!(
                    "degree {d}, basis {}, {} pinned, {} skipped: {}",
                    report.basis_size,
                    report.pinned.len() + pins.len(),
                    report.skipped.len(),
                    verdict_line(&report.verdict)
                ),
                result: to_value(&report),
                csv: None,
            })
        }
        JobConfig::Quantize(j) => {
            let target = presentation(&j.target)?;
            let family = build_contexts(&target, &j.contexts)?;
            let d = j.degree.expect("defaulted");
            let mode = j.mode.clone().expect("defaulted");
            let verdict = contextual_quantization_verify(&family, &j.target_state, &mode, d, j.generation, &j.options)
                .map_err(|e| e.to_string())?;
            // pairwise commutation of the contexts, reported but not judged
            let mut pairs = Vec::new();
            for (a, (f, _)) in family.iter().enumerate() {
                for (g, _) in &family[a + 1..] {
                    let report = check_context_compatibility(f, g, d).map_err(|e| e.to_string())?;
                    pairs.push(json!({ "left": f.label(), "right": g.label(), "report": to_value(&report) }));
                }
            }
            let noncommuting = pairs.iter().filter(|p| p["report"]["compatible"] == json!(false)).count();
            let mut result = to_value(&verdict);
            result["compatibility"] = Value::Array(pairs);
            let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
            Ok(JobOutcome {
                passed: verdict.passed,
                summary: format!(
                    "{}: homomorphism {}, injectivity {}, correspondence {}, generation {}, unification {} ({}); noncommuting context pairs: {}",
                    if verdict.passed { "pass" } else { "fail" },
                    mark(verdict.homomorphism_ok),
                    mark(verdict.injectivity_ok),
                    mark(verdict.correspondence_ok),
                    mark(verdict.generation_ok),
                    mark(verdict.pcp_ok),
                    verdict.pcp.verdict.label(),
                    noncommuting
                ),
                result,
                csv: None,
            })
        }
        JobConfig::Twoslit(j) => {
            let n = j.dimension.expect("defaulted");
            let marginals = j
                .marginals
                .iter()
                .enumerate()
                .map(|(i, m)| marginal(n, m).map_err(|e| format!("marginals[{i}].basis: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            let verdict = density_marginal_feasible(n, &marginals, &j.options).map_err(|e| e.to_string())?;
            let mut result = json!({ "dimension": n, "verdict": to_value(&verdict) });
            if let FeasibilityVerdict::Feasible {
                witness: Witness::Density(rows),
                ..
            } = &verdict
            {
                let rho = DMatrix::from_fn(n, n, |r, c| rows[r][c].0);
                let (reproduced, deviation) = reproduce(&rho, &marginals);
                result["reproduced"] = to_value(&reproduced);
                result["max_deviation"] = json!(deviation);
            }
            Ok(JobOutcome {
                passed: verdict.is_feasible(),
                summary: format!("{} marginals on C^{n}: {}", marginals.len(), verdict_line(&verdict)),
                result,
                csv: None,
            })
        }
        JobConfig::Wigner(j) => {
            let config = EnsembleConfig::new(j.n, j.ensemble, j.trials, j.seed.expect("validated"));
            let estimates = estimate_trace_moments(&config, j.kmax).map_err(|e| e.to_string())?;
            let allowance = j.bias_allowance.expect("defaulted");
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            let mut passed = true;
            for e in &estimates {
                let prediction = fock_prediction(e.k).map_err(|e| e.to_string())?;
                let abs_error = (e.mean - prediction).abs();
                let band = 3.0 * e.stderr + allowance;
                let checked = e.k <= BAND_MAX_K;
                let within = abs_error <= band;
                if checked {
                    passed &= within;
                }
                checks.push(json!({
                    "k": e.k, "mean": e.mean, "stderr": e.stderr, "prediction": prediction,
                    "abs_error": abs_error, "band": band, "checked": checked, "within_band": within,
                }));
                rows.push(SweepRow {
                    n: j.n,
                    k: e.k,
                    mean: e.mean,
                    stderr: e.stderr,
                    prediction,
                    abs_error,
                });
            }
            let worst = checks
                .iter()
                .filter(|c| c["checked"] == json!(true))
                .map(|c| c["abs_error"].as_f64().unwrap() / c["band"].as_f64().unwrap())
                .fold(0.0, f64::max);
            Ok(JobOutcome {
                passed,
                summary: format!(
                    "{} N={} trials={}: {} moments, worst error at {:.2} of band",
                    j.ensemble.as_str(),
                    j.n,
                    j.trials,
                    estimates.len(),
                    worst
                ),
                result: json!({ "moments": checks }),
                csv: Some(sweep_csv(&rows)),
            })
        }
        JobConfig::Replica(j) => {
            let pattern = parse_pattern(&j.pattern).map_err(|e| e.to_string())?;
            let config = EnsembleConfig {
                n: j.n,
                ensemble: j.ensemble,
                replicas: j.replicas,
                coefficients: j.coefficients.clone(),
                trials: j.trials,
                seed: j.seed.expect("validated"),
            };
            let report = replica_moment_experiment(&config, &pattern).map_err(|e| e.to_string())?;
            let allowance = j.bias_allowance.expect("defaulted");
            let band = 3.0 * report.estimate.stderr + allowance;
            let error = (report.estimate.mean - report.prediction.0.re).abs();
            let passed = error <= band;
            let mut result = to_value(&report);
            result["band"] = json!(band);
            result["within_band"] = json!(passed);
            Ok(JobOutcome {
                passed,
                summary: format!(
                    "pattern ({}) over {} replicas: estimate {:.6} ± {:.6}, prediction {}",
                    report.pattern,
                    j.replicas,
                    report.estimate.mean,
                    report.estimate.stderr,
                    crate::algebra::format_complex(report.prediction.0)
                ),
                result,
                csv: None,
            })
        }
        JobConfig::Sweep(j) => {
            let rows = convergence_sweep(&j.ns, j.kmax, j.trials, j.seed.expect("validated"), j.ensemble)
                .map_err(|e| e.to_string())?;
            Ok(JobOutcome {
                passed: true,
                summary: format!("{} rows for N in {:?}", rows.len(), j.ns),
                result: json!({ "rows": to_value(&rows) }),
                csv: Some(sweep_csv(&rows)),
            })
        }
    }
}

fn verdict_line(v: &FeasibilityVerdict) -> String {
    match v {
        FeasibilityVerdict::Feasible { min_eigenvalue, .. } => format!("feasible (λ_min {min_eigenvalue:.3e})"),
        FeasibilityVerdict::InfeasibleCertified { reason } => format!("infeasible_certified: {reason}"),
        FeasibilityVerdict::NumericallyInfeasible { residual, .. } => {
            format!("numerically_infeasible (residual {residual:.3e})")
        }
        FeasibilityVerdict::Undecided { residual, .. } => format!("undecided (residual {residual:.3e})"),
    }
}

fn named_basis(name: &str, n: usize) -> Result<DMatrix<Complex64>, String> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match name.to_ascii_lowercase().as_str() {
        "z" | "computational" | "identity" => Ok(DMatrix::identity(n, n)),
        "x" | "hadamard" if n == 2 => Ok(DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        )),
        "y" if n == 2 => Ok(DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, -s)],
        )),
        "fourier" => {
            let w = 2.0 * std::f64::consts::PI / n as f64;
            let norm = 1.0 / (n as f64).sqrt();
            Ok(DMatrix::from_fn(n, n, |r, c| Complex64::from_polar(norm, w * (r * c) as f64)))
        }
        other => Err(format!("unknown basis `{other}` for dimension {n}")),
    }
}

fn marginal(n: usize, m: &MarginalConfig) -> Result<Marginal, String> {
    let basis = match &m.basis {
        BasisSpec::Named(name) => named_basis(name, n)?,
        BasisSpec::Matrix(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(format!("expected a {n}×{n} matrix"));
            }
            DMatrix::from_fn(n, n, |r, c| rows[r][c].0)
        }
    };
    Ok(Marginal {
        basis,
        probabilities: m.probabilities.clone(),
    })
}

/// Outcome probabilities of `rho` in each basis and the largest mismatch.
fn reproduce(rho: &DMatrix<Complex64>, marginals: &[Marginal]) -> (Vec<Vec<f64>>, f64) {
    let mut worst = 0.0f64;
    let out = marginals
        .iter()
        .map(|m| {
            (0..m.probabilities.len())
                .map(|k| {
                    let u = m.basis.column(k);
                    let p = (u.adjoint() * rho * u)[(0, 0)].re;
                    worst = worst.max((p - m.probabilities[k]).abs());
                    p
                })
                .collect()
        })
        .collect();
    (out, worst)
}
