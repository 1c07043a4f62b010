use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{normal_form, Polynomial, Presentation, PRUNE_THRESHOLD};
use crate::complex_value::ComplexValue;
use crate::context::{apply_context, ContextError, ContextMap};
use crate::state::{StateEvaluator, StateSpec};

use super::{
    enumerate_basis_words, feasibility_solve, FeasibilityError, FeasibilityOptions, FeasibilityVerdict,
    LinearPin, MomentMatrix,
};

const CLASH_TOL: f64 = 1e-9;

/// A context with the state it carries on its source algebra.
pub type ContextInput = (ContextMap, StateSpec);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinnedMoment {
    pub context: String,
    pub source_word: String,
    pub target: String,
    pub value: ComplexValue,
}

/// A source word whose image lies above degree `2d` and so cannot be pinned.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedPin {
    pub context: String,
    pub source_word: String,
    pub target: String,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcpReport {
    pub degree: usize,
    pub basis_size: usize,
    pub pinned: Vec<PinnedMoment>,
    pub skipped: Vec<SkippedPin>,
    pub verdict: FeasibilityVerdict,
}

/// `form` scaled so its leading coefficient is 1, and the scale.
fn normalized(form: &Polynomial) -> (Polynomial, Complex64) {
    let lead = form.terms().values().next_back().copied().unwrap_or(Complex64::new(1.0, 0.0));
    (form.scale(lead.inv()), lead)
}

fn same_form(a: &Polynomial, b: &Polynomial) -> bool {
    a.len() == b.len()
        && a.terms()
            .iter()
            .zip(b.terms())
            .all(|((wa, ca), (wb, cb))| wa == wb && (ca - cb).norm() <= 1e-12)
}

/// Pins every target moment the contexts determine, then asks whether one
/// positive state on the target carries all of them.
pub fn pcp_check(
    target: &Presentation,
    contexts: &[ContextInput],
    extra_pins: &[(String, LinearPin)],
    d: usize,
    options: &FeasibilityOptions,
) -> Result<PcpReport, FeasibilityError> {
    let limit = 2 * d;
    let basis_size = enumerate_basis_words(target, d)?.len();
    let mut pinned = Vec::new();
    let mut skipped = Vec::new();
    let mut pins: Vec<(String, LinearPin)> = Vec::new();
    let report = |pinned, skipped, verdict| PcpReport {
        degree: d,
        basis_size,
        pinned,
        skipped,
        verdict,
    };

    let mut candidates: Vec<(String, String, LinearPin)> = Vec::new();
    for (f, state) in contexts {
        if f.target().space() != target.space() {
            return Err(ContextError::TargetMismatch.into());
        }
        let f = f.retarget(target)?;
        let source = f.source();
        let phi = StateEvaluator::new(state, source)?;
        for w in enumerate_basis_words(source, limit)? {
            let image = apply_context(&f, &source.word_poly(w.clone()))?.pruned(PRUNE_THRESHOLD);
            if image.degree() > limit {
                skipped.push(SkippedPin {
                    context: f.label().to_string(),
                    source_word: source.word_to_string(&w),
                    target: target.poly_to_string(&image),
                    degree: image.degree(),
                });
                continue;
            }
            let value = phi.evaluate(&source.word_poly(w.clone()))?;
            pinned.push(PinnedMoment {
                context: f.label().to_string(),
                source_word: source.word_to_string(&w),
                target: target.poly_to_string(&image),
                value: ComplexValue(value),
            });
            candidates.push((
                f.label().to_string(),
                source.word_to_string(&w),
                LinearPin { form: image, value },
            ));
        }
    }
    for (label, pin) in extra_pins {
        let form = normal_form(&pin.form, target)?;
        pinned.push(PinnedMoment {
            context: label.clone(),
            source_word: String::new(),
            target: target.poly_to_string(&form),
            value: ComplexValue(pin.value),
        });
        candidates.push((label.clone(), String::new(), LinearPin { form, value: pin.value }));
    }

    // clashes between pins on the same target form
    let mut seen: Vec<(Polynomial, Complex64, String)> = Vec::new();
    for (label, word, pin) in candidates {
        let who = if word.is_empty() { label.clone() } else { format!("{label}: {word}") };
        if pin.form.is_zero() {
            if pin.value.norm() > CLASH_TOL {
                let verdict = FeasibilityVerdict::InfeasibleCertified {
                    reason: format!("{who} maps to 0 but carries value {}", crate::algebra::format_complex(pin.value)),
                };
                return Ok(report(pinned, skipped, verdict));
            }
            continue;
        }
        let (form, lead) = normalized(&pin.form);
        let value = pin.value / lead;
        if let Some((_, other, other_who)) = seen.iter().find(|(f, _, _)| same_form(f, &form)) {
            if (value - other).norm() > CLASH_TOL * value.norm().max(1.0) {
                let verdict = FeasibilityVerdict::InfeasibleCertified {
                    reason: format!(
                        "ψ({}) is pinned to {} by {other_who} and to {} by {who}",
                        target.poly_to_string(&form),
                        crate::algebra::format_complex(*other),
                        crate::algebra::format_complex(value)
                    ),
                };
                return Ok(report(pinned, skipped, verdict));
            }
            continue;
        }
        seen.push((form.clone(), value, who.clone()));
        pins.push((who, LinearPin { form, value }));
    }

    let matrix = MomentMatrix::with_pins(target, d, pins.into_iter().map(|(_, p)| p).collect())?;
    let verdict = feasibility_solve(&matrix, options);
    Ok(report(pinned, skipped, verdict))
}
