//! States: positive normalized functionals evaluated on presentations.

mod gaussian;
pub mod gibbs;
mod pairings;

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    normal_form, parse_expression, AlgebraError, ClassTag, Polynomial, Presentation, Word,
};
use crate::complex_value::ComplexValue;

pub use gaussian::gaussian_moment;
pub use gibbs::{gibbs_oscillator_evaluate, q_squared_closed_form, GibbsEvaluation};
pub use pairings::count_noncrossing_pair_matchings;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("state `{state}` is not defined on class {class}")]
    UnsupportedClass { state: &'static str, class: ClassTag },
    #[error("moment table has no value for canonical word `{0}`")]
    MissingMoment(String),
    #[error("parameter {name} differs: presentation {presentation}, state {state}")]
    ParameterMismatch {
        name: &'static str,
        presentation: f64,
        state: f64,
    },
    #[error("invalid state: {0}")]
    InvalidSpec(String),
    #[error("{modes} modes at truncation {truncation} exceed the joint dimension cap {cap:e}")]
    SizeOverflow {
        modes: usize,
        truncation: usize,
        cap: f64,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Which state to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Vacuum expectation on a Boltzmann-class algebra.
    Fock,
    /// Centered Gaussian of standard deviation `sigma` for every generator of
    /// a commutative presentation, independent across generators.
    Gaussian { sigma: f64 },
    /// Normalized Gibbs state of the oscillator `H = ½Σ(p_i² + q_i²)`.
    GibbsOscillator {
        beta: f64,
        h: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
    /// Explicit values keyed by expression text (`"1"` for the unit).
    MomentTable {
        moments: BTreeMap<String, ComplexValue>,
    },
}

impl StateSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StateSpec::Fock => "fock",
            StateSpec::Gaussian { .. } => "gaussian",
            StateSpec::GibbsOscillator { .. } => "gibbs_oscillator",
            StateSpec::MomentTable { .. } => "moment_table",
        }
    }

    /// Numeric parameters, for report metadata.
    pub fn parameters(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match self {
            StateSpec::Gaussian { sigma } => {
                out.insert("sigma".into(), *sigma);
            }
            StateSpec::GibbsOscillator {
                beta,
                h,
                truncation,
            } => {
                out.insert("beta".into(), *beta);
                out.insert("h".into(), *h);
                if let Some(d) = truncation {
                    out.insert("truncation".into(), *d as f64);
                }
            }
            StateSpec::Fock | StateSpec::MomentTable { .. } => {}
        }
        out
    }

    pub fn validate(&self) -> Result<(), StateError> {
        match self {
            StateSpec::Gaussian { sigma } if !(*sigma > 0.0) => {
                Err(StateError::InvalidSpec("gaussian sigma must be positive".into()))
            }
            StateSpec::GibbsOscillator {
                beta,
                h,
                truncation,
            } => {
                if !(*beta > 0.0 && *h > 0.0) {
                    return Err(StateError::InvalidSpec(
                        "gibbs_oscillator needs beta > 0 and h > 0".into(),
                    ));
                }
                if truncation.is_some_and(|d| d < 2) {
                    return Err(StateError::InvalidSpec("truncation must be at least 2".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A moment table resolved against a presentation: canonical word → value.
#[derive(Clone, Debug)]
pub struct ResolvedTable {
    values: HashMap<Word, Complex64>,
}

impl ResolvedTable {
    pub fn resolve(
        moments: &BTreeMap<String, ComplexValue>,
        pres: &Presentation,
    ) -> Result<Self, StateError> {
        let mut values = HashMap::new();
        for (key, value) in moments {
            let text = if key.trim().is_empty() { "1" } else { key.as_str() };
            let reduced = normal_form(&parse_expression(text, pres)?, pres)?;
            let word = match reduced.terms().iter().next() {
                Some((w, c)) if reduced.len() == 1 && *c == Complex64::new(1.0, 0.0) => w.clone(),
                _ => {
                    return Err(StateError::InvalidSpec(format!(
                        "moment key `{key}` does not reduce to a single canonical word"
                    )))
                }
            };
            if values.insert(word, value.0).is_some() {
                return Err(StateError::InvalidSpec(format!(
                    "moment key `{key}` duplicates another key"
                )));
            }
        }
        match values.get(&Word::unit()) {
            Some(v) if (*v - Complex64::new(1.0, 0.0)).norm() <= 1e-12 => {}
            _ => {
                return Err(StateError::InvalidSpec(
                    "moment table must contain the unit word with value 1".into(),
                ))
            }
        }
        let table = ResolvedTable { values };
        table.check_hermitian(pres)?;
        Ok(table)
    }

    fn check_hermitian(&self, pres: &Presentation) -> Result<(), StateError> {
        for (word, value) in &self.values {
            let adj = normal_form(&pres.adjoint(&pres.word_poly(word.clone())), pres)?;
            if let Ok(v) = self.contract(&adj, pres) {
                if (v - value.conj()).norm() > 1e-9 {
                    return Err(StateError::InvalidSpec(format!(
                        "moment table is not Hermitian at `{}`",
                        pres.word_to_string(word)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, word: &Word) -> Option<Complex64> {
        self.values.get(word).copied()
    }

    /// Contracts a canonical polynomial against the table.
    pub fn contract(&self, x: &Polynomial, pres: &Presentation) -> Result<Complex64, StateError> {
        let mut total = Complex64::default();
        for (w, c) in x.terms() {
            let v = self
                .values
                .get(w)
                .ok_or_else(|| StateError::MissingMoment(pres.word_to_string(w)))?;
            total += c * v;
        }
        Ok(total)
    }
}

/// Vacuum expectation: the constant term of the normal form.
pub fn fock_evaluate(x: &Polynomial, pres: &Presentation) -> Result<Complex64, StateError> {
    if !matches!(pres.class(), ClassTag::Boltzmann | ClassTag::GramBoltzmann) {
        return Err(StateError::UnsupportedClass {
            state: "fock",
            class: pres.class(),
        });
    }
    Ok(normal_form(x, pres)?.constant_term())
}

fn gaussian_evaluate(x: &Polynomial, pres: &Presentation, sigma: f64) -> Result<Complex64, StateError> {
    if pres.class() != ClassTag::Commutative {
        return Err(StateError::UnsupportedClass {
            state: "gaussian",
            class: pres.class(),
        });
    }
    let reduced = normal_form(x, pres)?;
    let mut total = Complex64::default();
    let mut counts = vec![0u32; pres.generators().len()];
    for (w, c) in reduced.terms() {
        counts.iter_mut().for_each(|k| *k = 0);
        for &g in w.letters() {
            counts[g as usize] += 1;
        }
        let v: f64 = counts.iter().map(|&k| gaussian_moment(k, sigma)).product();
        total += c * v;
    }
    Ok(total)
}

/// A state prepared for repeated evaluation on one presentation.
#[derive(Clone, Debug)]
pub struct StateEvaluator<'a> {
    spec: &'a StateSpec,
    pres: &'a Presentation,
    table: Option<ResolvedTable>,
}

impl<'a> StateEvaluator<'a> {
    pub fn new(spec: &'a StateSpec, pres: &'a Presentation) -> Result<Self, StateError> {
        spec.validate()?;
        let table = match spec {
            StateSpec::MomentTable { moments } => Some(ResolvedTable::resolve(moments, pres)?),
            StateSpec::Fock => {
                if !matches!(pres.class(), ClassTag::Boltzmann | ClassTag::GramBoltzmann) {
                    return Err(StateError::UnsupportedClass {
                        state: "fock",
                        class: pres.class(),
                    });
                }
                None
            }
            StateSpec::Gaussian { .. } if pres.class() != ClassTag::Commutative => {
                return Err(StateError::UnsupportedClass {
                    state: "gaussian",
                    class: pres.class(),
                })
            }
            StateSpec::GibbsOscillator { .. } if pres.class() != ClassTag::Ccr => {
                return Err(StateError::UnsupportedClass {
                    state: "gibbs_oscillator",
                    class: pres.class(),
                })
            }
            _ => None,
        };
        Ok(StateEvaluator { spec, pres, table })
    }

    pub fn presentation(&self) -> &Presentation {
        self.pres
    }

    pub fn evaluate(&self, x: &Polynomial) -> Result<Complex64, StateError> {
        match self.spec {
            StateSpec::Fock => fock_evaluate(x, self.pres),
            StateSpec::Gaussian { sigma } => gaussian_evaluate(x, self.pres, *sigma),
            StateSpec::GibbsOscillator {
                beta,
                h,
                truncation,
            } => Ok(gibbs_oscillator_evaluate(x, self.pres, *beta, *h, *truncation)?.value),
            StateSpec::MomentTable { .. } => {
                let reduced = normal_form(x, self.pres)?;
                self.table
                    .as_ref()
                    .expect("resolved at construction")
                    .contract(&reduced, self.pres)
            }
        }
    }
}

/// Evaluates `spec` on `x`.
pub fn state_evaluate(
    spec: &StateSpec,
    x: &Polynomial,
    pres: &Presentation,
) -> Result<Complex64, StateError> {
    StateEvaluator::new(spec, pres)?.evaluate(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEntry {
    pub expression: String,
    /// Number of words in the normal form of the expression.
    pub canonical_words: usize,
    pub value: ComplexValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentMetadata {
    pub presentation_hash: String,
    pub state_kind: String,
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
    pub metadata: MomentMetadata,
}

/// Evaluates each expression and collects a report.
pub fn moment_report(
    spec: &StateSpec,
    pres: &Presentation,
    expressions: &[String],
) -> Result<MomentReport, StateError> {
    let eval = StateEvaluator::new(spec, pres)?;
    let mut entries = Vec::with_capacity(expressions.len());
    for text in expressions {
        let x = parse_expression(text, pres)?;
        let value = eval.evaluate(&x)?;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(StateError::InvalidSpec(format!("non-finite value for `{text}`")));
        }
        entries.push(MomentEntry {
            expression: text.clone(),
            canonical_words: normal_form(&x, pres)?.len(),
            value: ComplexValue(value),
        });
    }
    Ok(MomentReport {
        entries,
        metadata: MomentMetadata {
            presentation_hash: pres.fingerprint(),
            state_kind: spec.kind().to_string(),
            parameters: spec.parameters(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_presentation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fock_basics() {
        let b = parse_presentation("class boltzmann; modes 2").unwrap();
        let eval = |t: &str| fock_evaluate(&parse_expression(t, &b).unwrap(), &b).unwrap();
        assert_eq!(eval("1"), c(1.0, 0.0));
        assert_eq!(eval("A1 A1'"), c(1.0, 0.0));
        assert_eq!(eval("(A1 + A1')^4"), c(2.0, 0.0));
        assert_eq!(eval("(A1+A1')(A2+A2')(A1+A1')(A2+A2')"), c(0.0, 0.0));
        assert_eq!(eval("(A1+A1')^2 (A2+A2')^2"), c(1.0, 0.0));
    }

    #[test]
    fn one_mode_catalan_moments() {
        let b = parse_presentation("class boltzmann; modes 1").unwrap();
        for (k, expected) in [(0, 1.0), (2, 1.0), (4, 2.0), (6, 5.0), (8, 14.0)] {
            let x = parse_expression(&format!("(A + A')^{k}"), &b).unwrap();
            assert_eq!(fock_evaluate(&x, &b).unwrap(), c(expected, 0.0));
        }
    }

    #[test]
    fn fock_rejects_other_classes() {
        let p = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        assert!(matches!(
            fock_evaluate(&p.one(), &p),
            Err(StateError::UnsupportedClass { .. })
        ));
    }

    #[test]
    fn dispatcher_examples() {
        let b = parse_presentation("class boltzmann; modes 1").unwrap();
        let x = parse_expression("A A'", &b).unwrap();
        assert_eq!(state_evaluate(&StateSpec::Fock, &x, &b).unwrap(), c(1.0, 0.0));

        let x1 = parse_presentation("class commutative; modes 1").unwrap();
        let y = parse_expression("x^4", &x1).unwrap();
        assert_eq!(
            state_evaluate(&StateSpec::Gaussian { sigma: 2.0 }, &y, &x1).unwrap(),
            c(48.0, 0.0)
        );

        let ccr = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        let table = StateSpec::MomentTable {
            moments: BTreeMap::from([("1".to_string(), ComplexValue::real(1.0))]),
        };
        let qp = parse_expression("q p", &ccr).unwrap();
        assert!(matches!(
            state_evaluate(&table, &qp, &ccr),
            Err(StateError::MissingMoment(w)) if w == "q p"
        ));
    }

    #[test]
    fn moment_table_contracts_normal_form() {
        let ccr = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        let table = StateSpec::MomentTable {
            moments: BTreeMap::from([
                ("1".to_string(), ComplexValue::real(1.0)),
                ("q p".to_string(), ComplexValue(c(0.0, 0.5))),
            ]),
        };
        // p q = q p - i
        let pq = parse_expression("p q", &ccr).unwrap();
        assert_eq!(state_evaluate(&table, &pq, &ccr).unwrap(), c(0.0, -0.5));
    }

    #[test]
    fn moment_table_validation() {
        let ccr = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        let missing_unit = StateSpec::MomentTable {
            moments: BTreeMap::from([("q".to_string(), ComplexValue::real(0.0))]),
        };
        assert!(StateEvaluator::new(&missing_unit, &ccr).is_err());
        // ψ(qp) must have imaginary part h/2 when ψ(pq) is tabulated too
        let bad = StateSpec::MomentTable {
            moments: BTreeMap::from([
                ("1".to_string(), ComplexValue::real(1.0)),
                ("q".to_string(), ComplexValue(c(0.0, 1.0))),
            ]),
        };
        assert!(StateEvaluator::new(&bad, &ccr).is_err());
    }

    #[test]
    fn report_metadata() {
        let b = parse_presentation("class boltzmann; modes 1").unwrap();
        let r = moment_report(&StateSpec::Fock, &b, &["(A+A')^4".to_string()]).unwrap();
        assert_eq!(r.entries[0].value, ComplexValue::real(2.0));
        assert_eq!(r.entries[0].canonical_words, 9);
        assert_eq!(r.metadata.state_kind, "fock");
        assert_eq!(r.metadata.presentation_hash, b.fingerprint());
    }
}
