use serde::{Deserialize, Serialize};

use crate::complex_value::ComplexValue;
use crate::state::{StateEvaluator, StateSpec};

use super::{apply_context, checks::basis_words, ContextError, ContextMap};

/// Tolerance for exact correspondence.
pub const EXACT_TOL: f64 = 1e-9;

/// How the target state has to reproduce the source state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrespondenceMode {
    /// `ψ(f(w)) = φ(w)` to 1e-9.
    Exact,
    /// `ψ_h(f(w)) → φ(w)` along a decreasing schedule of `h`.
    Limit {
        #[serde(default = "default_schedule")]
        schedule: Vec<f64>,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

pub fn default_schedule() -> Vec<f64> {
    vec![1.0, 0.3, 0.1, 0.03, 0.01]
}

fn default_tolerance() -> f64 {
    5e-3
}

impl CorrespondenceMode {
    pub fn validate(&self) -> Result<(), ContextError> {
        if let CorrespondenceMode::Limit { schedule, tolerance } = self {
            if schedule.len() < 3 {
                return Err(ContextError::InvalidMode("limit schedule needs at least 3 points".into()));
            }
            if schedule.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
                return Err(ContextError::InvalidMode("schedule values must be positive".into()));
            }
            if schedule.windows(2).any(|w| w[1] >= w[0]) {
                return Err(ContextError::InvalidMode("schedule must be strictly decreasing".into()));
            }
            if !(*tolerance > 0.0) {
                return Err(ContextError::InvalidMode("tolerance must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            CorrespondenceMode::Exact => "exact",
            CorrespondenceMode::Limit { .. } => "limit",
        }
    }
}

/// Member of a state family at deformation parameter `h`: the Gibbs state
/// takes the new `h`, other states are unchanged.
pub fn state_at(spec: &StateSpec, h: f64) -> StateSpec {
    match spec {
        StateSpec::GibbsOscillator { beta, truncation, .. } => StateSpec::GibbsOscillator {
            beta: *beta,
            h,
            truncation: *truncation,
        },
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceRow {
    pub word: String,
    pub source: ComplexValue,
    /// Target value at each schedule point (one entry in exact mode).
    pub target: Vec<ComplexValue>,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchedulePoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub context: String,
    pub mode: &'static str,
    pub degree: usize,
    pub rows: Vec<CorrespondenceRow>,
    pub points: Vec<SchedulePoint>,
    pub monotone: bool,
    pub final_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `ψ(f(w))` with `φ(w)` for every source canonical word of degree
/// at most `d`.
pub fn verify_state_correspondence(
    f: &ContextMap,
    source_state: &StateSpec,
    target_state: &StateSpec,
    mode: &CorrespondenceMode,
    d: usize,
) -> Result<CorrespondenceReport, ContextError> {
    mode.validate()?;
    let source = f.source();
    let words = basis_words(source, d)?;
    let phi = StateEvaluator::new(source_state, source)?;
    let source_values = words
        .iter()
        .map(|w| phi.evaluate(&source.word_poly(w.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let (hs, tolerance): (Vec<Option<f64>>, f64) = match mode {
        CorrespondenceMode::Exact => (vec![None], EXACT_TOL),
        CorrespondenceMode::Limit { schedule, tolerance } => (schedule.iter().map(|h| Some(*h)).collect(), *tolerance),
    };
    let mut targets = vec![Vec::new(); words.len()];
    let mut points = Vec::new();
    for h in &hs {
        let (ctx, spec) = match h {
            None => (f.clone(), target_state.clone()),
            Some(h) => (f.retarget(&f.target().with_param("h", *h)?)?, state_at(target_state, *h)),
        };
        let psi = StateEvaluator::new(&spec, ctx.target())?;
        let mut max_error = 0.0f64;
        for (k, w) in words.iter().enumerate() {
            let value = psi.evaluate(&apply_context(&ctx, &source.word_poly(w.clone()))?)?;
            max_error = max_error.max((value - source_values[k]).norm());
            targets[k].push(value);
        }
        points.push(SchedulePoint { h: *h, max_error });
    }
    let monotone = points
        .windows(2)
        .all(|w| w[1].max_error <= w[0].max_error + 1e-12 * w[0].max_error.max(1.0));
    let final_error = points.last().map_or(0.0, |p| p.max_error);
    let rows = words
        .iter()
        .zip(source_values)
        .zip(targets)
        .map(|((w, s), t)| CorrespondenceRow {
            word: source.word_to_string(w),
            source: ComplexValue(s),
            error: (t.last().copied().unwrap_or_default() - s).norm(),
            target: t.into_iter().map(ComplexValue).collect(),
        })
        .collect();
    Ok(CorrespondenceReport {
        context: f.label().to_string(),
        mode: mode.name(),
        degree: d,
        rows,
        points,
        monotone,
        final_error,
        tolerance,
        passed: monotone && final_error <= tolerance,
    })
}
