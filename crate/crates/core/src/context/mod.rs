//! Probability contexts: *-homomorphisms from a source algebra into a shared
//! target, and the checks that make a family of them a quantization.

mod checks;
mod correspondence;
mod verify;

pub use checks::{
    check_context_compatibility, injectivity_probe, verify_generation, verify_homomorphism,
    CommutatorWitness, CompatibilityReport, GenerationReport, HomomorphismReport, InjectivityReport,
    RuleViolation,
};
pub use correspondence::{
    default_schedule, state_at, verify_state_correspondence, CorrespondenceMode, CorrespondenceReport, CorrespondenceRow,
    SchedulePoint,
};
pub use verify::{contextual_quantization_verify, GenerationMode, QuantizationVerdict};

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{normal_form, AlgebraError, ClassTag, Polynomial, Presentation};
use crate::state::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContextError {
    #[error("context `{context}` gives no image for source generator `{generator}`")]
    MissingGenerator { context: String, generator: String },
    #[error("context `{context}` maps `{generator}`, which is not a source generator")]
    UnknownGenerator { context: String, generator: String },
    #[error("context `{context}` does not respect the adjoint at `{generator}`: residual {residual}")]
    AdjointMismatch {
        context: String,
        generator: String,
        residual: String,
    },
    #[error("basis has {size} words, above the cap of {cap}")]
    BasisTooLarge { size: usize, cap: usize },
    #[error("invalid correspondence mode: {0}")]
    InvalidMode(String),
    #[error("unification check failed: {0}")]
    Unification(String),
    #[error("contexts do not share one target presentation")]
    TargetMismatch,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// A generator substitution from `source` into `target`, extended to a
/// *-homomorphism.
#[derive(Clone, Debug)]
pub struct ContextMap {
    label: String,
    source: Presentation,
    target: Presentation,
    /// Image of each source generator, indexed by generator id, as given.
    images: Vec<Polynomial>,
}

impl ContextMap {
    /// Builds a context from generator images. An image missing for a
    /// generator whose adjoint partner is mapped is filled in as the adjoint
    /// of the partner's image.
    pub fn new(
        label: impl Into<String>,
        source: &Presentation,
        target: &Presentation,
        substitution: BTreeMap<String, Polynomial>,
    ) -> Result<Self, ContextError> {
        let label = label.into();
        let gens = source.generators();
        let mut images: Vec<Option<Polynomial>> = vec![None; gens.len()];
        for (name, image) in substitution {
            let id = source.generator_id(&name).ok_or_else(|| ContextError::UnknownGenerator {
                context: label.clone(),
                generator: name.clone(),
            })?;
            if image.space() != target.space() {
                return Err(AlgebraError::MismatchedPresentations.into());
            }
            images[id as usize] = Some(image);
        }
        for id in 0..gens.len() {
            if images[id].is_none() {
                let partner = source.partner(id as u16) as usize;
                match images[partner].clone() {
                    Some(p) if partner != id => images[id] = Some(target.adjoint(&p)),
                    _ => {
                        return Err(ContextError::MissingGenerator {
                            context: label,
                            generator: gens[id].name.clone(),
                        })
                    }
                }
            }
        }
        let images: Vec<Polynomial> = images.into_iter().map(Option::unwrap).collect();
        for (id, g) in gens.iter().enumerate() {
            let partner = source.partner(id as u16) as usize;
            let lhs = normal_form(&images[partner], target)?;
            let rhs = normal_form(&target.adjoint(&images[id]), target)?;
            let residual = lhs.sub(&rhs)?.pruned(crate::algebra::PRUNE_THRESHOLD);
            if !residual.is_zero() {
                return Err(ContextError::AdjointMismatch {
                    context: label,
                    generator: g.name.clone(),
                    residual: target.poly_to_string(&residual),
                });
            }
        }
        Ok(ContextMap {
            label,
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    /// Builds a context from image expressions written over `target`.
    pub fn from_text(
        label: impl Into<String>,
        source: &Presentation,
        target: &Presentation,
        substitution: &BTreeMap<String, String>,
    ) -> Result<Self, ContextError> {
        let mut parsed = BTreeMap::new();
        for (name, text) in substitution {
            parsed.insert(name.clone(), crate::algebra::parse_expression(text, target)?);
        }
        Self::new(label, source, target, parsed)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> &Presentation {
        &self.target
    }

    /// Images in generator order, reduced in the target.
    pub fn images(&self) -> Result<Vec<Polynomial>, ContextError> {
        self.images
            .iter()
            .map(|p| normal_form(p, &self.target).map_err(Into::into))
            .collect()
    }

    /// `(generator name, image text)` pairs in generator order.
    pub fn substitution_text(&self) -> Vec<(String, String)> {
        self.source
            .generators()
            .iter()
            .zip(&self.images)
            .map(|(g, p)| (g.name.clone(), self.target.poly_to_string(p)))
            .collect()
    }

    /// The same substitution into a re-parameterized copy of the target.
    pub fn retarget(&self, target: &Presentation) -> Result<Self, ContextError> {
        if target.space() != self.target.space() {
            return Err(ContextError::TargetMismatch);
        }
        Ok(ContextMap {
            target: target.clone(),
            ..self.clone()
        })
    }
}

/// `nf(f(x))`: letter-by-letter substitution, reduced in the target.
pub fn apply_context(f: &ContextMap, x: &Polynomial) -> Result<Polynomial, ContextError> {
    if x.space() != f.source.space() {
        return Err(AlgebraError::MismatchedPresentations.into());
    }
    let target = &f.target;
    let images = f.images()?;
    let mut out = target.zero();
    for (word, c) in x.terms() {
        let mut acc = target.scalar(*c);
        for &g in word.letters() {
            acc = normal_form(&acc.multiply(&images[g as usize])?, target)?;
        }
        out = out.add(&acc)?;
    }
    Ok(normal_form(&out, target)?)
}

/// Boltzmann algebra on `modes` annihilators indexed from 0.
pub fn replica_target(modes: usize) -> Result<Presentation, ContextError> {
    Ok(Presentation::preset(ClassTag::Boltzmann, modes, 0, BTreeMap::new(), None)?)
}

/// `A ↦ (1/√p) Σ_a c_a A_a` from the one-mode Boltzmann algebra into `p`
/// modes, `p = c.len()`.
pub fn replica_context(c: &[Complex64]) -> Result<ContextMap, ContextError> {
    let p = c.len();
    let source = Presentation::boltzmann(1)?;
    let target = replica_target(p)?;
    let mut image = target.zero();
    let scale = 1.0 / (p as f64).sqrt();
    for (a, ca) in c.iter().enumerate() {
        let gen = target.word_poly(crate::algebra::Word::letter((2 * a) as u16));
        image = image.add(&gen.scale(ca * scale))?;
    }
    let label = format!(
        "replica c=({})",
        c.iter().map(|z| crate::algebra::format_complex(*z)).collect::<Vec<_>>().join(", ")
    );
    ContextMap::new(label, &source, &target, BTreeMap::from([("A".to_string(), image)]))
}
