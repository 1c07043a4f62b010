use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{normal_form, Polynomial, Presentation, Word, PRUNE_THRESHOLD};
use crate::feasibility::{enumerate_basis_words, FeasibilityError};
use crate::linalg::complex_rank;

use super::{apply_context, ContextError, ContextMap};

const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleViolation {
    pub rule: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomomorphismReport {
    pub context: String,
    pub passed: bool,
    pub violations: Vec<RuleViolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub context: String,
    pub degree: usize,
    pub domain_dimension: usize,
    pub rank: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationReport {
    pub degree: usize,
    pub target_dimension: usize,
    /// Target words of degree ≤ d outside the span of image products.
    pub missing: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorWitness {
    pub left: String,
    pub right: String,
    pub commutator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub witness: Option<CommutatorWitness>,
}

pub(super) fn basis_words(pres: &Presentation, d: usize) -> Result<Vec<Word>, ContextError> {
    enumerate_basis_words(pres, d).map_err(|e| match e {
        FeasibilityError::BasisTooLarge { size, cap } => ContextError::BasisTooLarge { size, cap },
        other => ContextError::InvalidMode(other.to_string()),
    })
}

/// Checks `nf(f(L) − f(R)) = 0` for every source rule `L → R`.
pub fn verify_homomorphism(f: &ContextMap) -> Result<HomomorphismReport, ContextError> {
    let source = f.source();
    let mut violations = Vec::new();
    for rule in source.rules() {
        let left = source.word_poly(rule.left_word());
        let residual = apply_context(f, &left.sub(&rule.right)?)?.pruned(PRUNE_THRESHOLD);
        if !residual.is_zero() {
            violations.push(RuleViolation {
                rule: format!(
                    "{} -> {}",
                    source.word_to_string(&rule.left_word()),
                    source.poly_to_string(&rule.right)
                ),
                residual: f.target().poly_to_string(&residual),
            });
        }
    }
    Ok(HomomorphismReport {
        context: f.label().to_string(),
        passed: violations.is_empty(),
        violations,
    })
}

/// Coordinates of polynomials over the union of their words.
fn coordinates(polys: &[Polynomial]) -> (Vec<Vec<Complex64>>, usize) {
    let mut words: Vec<Word> = polys.iter().flat_map(|p| p.terms().keys().cloned()).collect();
    words.sort();
    words.dedup();
    let rows = polys
        .iter()
        .map(|p| {
            words
                .iter()
                .map(|w| p.coefficient(w))
                .collect()
        })
        .collect();
    (rows, words.len())
}

/// Rank of the images of all source canonical words of degree ≤ d.
pub fn injectivity_probe(f: &ContextMap, d: usize) -> Result<InjectivityReport, ContextError> {
    let words = basis_words(f.source(), d)?;
    let images = words
        .iter()
        .map(|w| apply_context(f, &f.source().word_poly(w.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let (rows, cols) = coordinates(&images);
    let rank = complex_rank(&rows, cols, RANK_TOL);
    Ok(InjectivityReport {
        context: f.label().to_string(),
        degree: d,
        domain_dimension: words.len(),
        rank,
        passed: rank == words.len(),
    })
}

/// Distinct nonzero polynomials among `images` and their adjoints.
fn with_adjoints(target: &Presentation, images: &[Polynomial]) -> Result<Vec<Polynomial>, ContextError> {
    let mut out: Vec<Polynomial> = Vec::new();
    for p in images {
        for q in [p.clone(), target.adjoint(p)] {
            let q = normal_form(&q, target)?;
            if !q.is_zero() && !out.contains(&q) {
                out.push(q);
            }
        }
    }
    Ok(out)
}

/// Products of at most `d` factors from `letters`, by number of factors.
fn products(
    target: &Presentation,
    letters: &[Polynomial],
    d: usize,
    include_unit: bool,
) -> Result<Vec<Polynomial>, ContextError> {
    let mut out = Vec::new();
    if include_unit {
        out.push(target.one());
    }
    let mut layer = vec![target.one()];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &layer {
            for l in letters {
                next.push(normal_form(&p.multiply(l)?, target)?);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

/// Does the *-algebra generated by `images` reach every target word of
/// degree ≤ d?
pub fn verify_generation(
    target: &Presentation,
    images: &[Polynomial],
    d: usize,
) -> Result<GenerationReport, ContextError> {
    let words = basis_words(target, d)?;
    let letters = with_adjoints(target, images)?;
    let span = products(target, &letters, d, true)?;
    let mut all = span.clone();
    all.extend(words.iter().map(|w| target.word_poly(w.clone())));
    let (rows, cols) = coordinates(&all);
    let span_rank = complex_rank(&rows[..span.len()], cols, RANK_TOL);
    let full_rank = complex_rank(&rows, cols, RANK_TOL);
    let missing = full_rank - span_rank;
    Ok(GenerationReport {
        degree: d,
        target_dimension: words.len(),
        missing,
        passed: missing == 0,
    })
}

/// First nonzero commutator between products (degree ≤ d) of the images of
/// `f` and of `g`.
pub fn check_context_compatibility(
    f: &ContextMap,
    g: &ContextMap,
    d: usize,
) -> Result<CompatibilityReport, ContextError> {
    if f.target().space() != g.target().space() {
        return Err(ContextError::TargetMismatch);
    }
    let target = f.target();
    let left = products(target, &with_adjoints(target, &f.images()?)?, d, false)?;
    let right = products(target, &with_adjoints(target, &g.images()?)?, d, false)?;
    for x in &left {
        for y in &right {
            let c = normal_form(&x.multiply(y)?.sub(&y.multiply(x)?)?, target)?.pruned(PRUNE_THRESHOLD);
            if !c.is_zero() {
                return Ok(CompatibilityReport {
                    compatible: false,
                    witness: Some(CommutatorWitness {
                        left: target.poly_to_string(x),
                        right: target.poly_to_string(y),
                        commutator: target.poly_to_string(&c),
                    }),
                });
            }
        }
    }
    Ok(CompatibilityReport {
        compatible: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::replica_context;
    use std::collections::BTreeMap;

    fn ctx(source: &Presentation, target: &Presentation, image: &str) -> ContextMap {
        let name = source.generators()[0].name.clone();
        ContextMap::from_text(image, source, target, &BTreeMap::from([(name, image.to_string())])).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn replica_homomorphism_depends_on_normalization() {
        let good = replica_context(&[c(1.0), c(1.0)]).unwrap();
        assert!(verify_homomorphism(&good).unwrap().passed);
        let bad = replica_context(&[c(1.0), c(0.0)]).unwrap();
        let report = verify_homomorphism(&bad).unwrap();
        assert!(!report.passed);
        let residual: f64 = report.violations[0].residual.parse().unwrap();
        assert!((residual + 0.5).abs() < 1e-12);
    }

    #[test]
    fn commutative_source_into_ccr() {
        let source = Presentation::commutative(1).unwrap();
        let target = Presentation::ccr(2, 1.0).unwrap();
        let f = ctx(&source, &target, "q1");
        assert!(verify_homomorphism(&f).unwrap().passed);
        let inj = injectivity_probe(&f, 3).unwrap();
        assert!(inj.passed);
        assert_eq!(inj.domain_dimension, 4);
        let zero = ctx(&source, &target, "0");
        assert!(!injectivity_probe(&zero, 1).unwrap().passed);
    }

    #[test]
    fn replica_is_injective() {
        let f = replica_context(&[c(1.0), c(1.0)]).unwrap();
        assert!(injectivity_probe(&f, 2).unwrap().passed);
    }

    #[test]
    fn generation() {
        let target = Presentation::ccr(2, 1.0).unwrap();
        let images: Vec<Polynomial> = ["q1", "q2", "p1", "p2"].iter().map(|g| target.gen(g).unwrap()).collect();
        assert!(verify_generation(&target, &images, 2).unwrap().passed);

        let one_mode = Presentation::ccr(1, 1.0).unwrap();
        let report = verify_generation(&one_mode, &[one_mode.gen("q").unwrap()], 2).unwrap();
        assert!(!report.passed);
        // p, q p, p p are unreachable
        assert_eq!(report.missing, 3);

        let boltz = Presentation::boltzmann(2).unwrap();
        let images: Vec<Polynomial> = ["A1", "A2"].iter().map(|g| boltz.gen(g).unwrap()).collect();
        assert!(verify_generation(&boltz, &images, 2).unwrap().passed);
    }

    #[test]
    fn compatibility() {
        let source = Presentation::commutative(1).unwrap();
        let target = Presentation::ccr(2, 1.0).unwrap();
        let q1 = ctx(&source, &target, "q1");
        let p1 = ctx(&source, &target, "p1");
        let q2 = ctx(&source, &target, "q2");
        let report = check_context_compatibility(&q1, &p1, 1).unwrap();
        assert!(!report.compatible);
        assert_eq!(report.witness.unwrap().commutator, "1i");
        assert!(check_context_compatibility(&q1, &q2, 2).unwrap().compatible);

        let s = 2f64.sqrt();
        let f = replica_context(&[c(s), c(0.0)]).unwrap();
        let g = replica_context(&[c(0.0), c(s)]).unwrap();
        assert!(!check_context_compatibility(&f, &g, 1).unwrap().compatible);
    }
}
