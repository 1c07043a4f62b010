use serde::{Deserialize, Serialize};

use crate::algebra::Polynomial;
use crate::feasibility::{pcp_check, FeasibilityOptions, PcpReport};
use crate::state::StateSpec;

use super::checks::{
    injectivity_probe, verify_generation, verify_homomorphism, GenerationReport, HomomorphismReport,
    InjectivityReport,
};
use super::correspondence::{verify_state_correspondence, CorrespondenceMode, CorrespondenceReport};
use super::{ContextError, ContextMap};

/// What the images have to generate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// The whole target algebra.
    #[default]
    Full,
    /// The target is taken to be the *-subalgebra the images generate, so
    /// generation holds by construction; the span is still reported.
    Subalgebra,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantizationVerdict {
    pub degree: usize,
    pub passed: bool,
    pub homomorphism_ok: bool,
    pub injectivity_ok: bool,
    pub correspondence_ok: bool,
    pub generation_ok: bool,
    pub pcp_ok: bool,
    pub generation_mode: GenerationMode,
    pub homomorphism: Vec<HomomorphismReport>,
    pub injectivity: Vec<InjectivityReport>,
    pub correspondence: Vec<CorrespondenceReport>,
    pub generation: GenerationReport,
    pub pcp: PcpReport,
}

/// Runs every check of a contextual quantization at degree `d`.
///
/// Injectivity and generation are probed at degree `d`; state correspondence
/// covers source words up to `2d`, the same words the unification step pins.
pub fn contextual_quantization_verify(
    family: &[(ContextMap, StateSpec)],
    target_state: &StateSpec,
    mode: &CorrespondenceMode,
    d: usize,
    generation_mode: GenerationMode,
    options: &FeasibilityOptions,
) -> Result<QuantizationVerdict, ContextError> {
    let target = match family.first() {
        Some((f, _)) => f.target().clone(),
        None => return Err(ContextError::InvalidMode("empty context family".into())),
    };
    if family.iter().any(|(f, _)| f.target().space() != target.space()) {
        return Err(ContextError::TargetMismatch);
    }
    let mut homomorphism = Vec::new();
    let mut injectivity = Vec::new();
    let mut correspondence = Vec::new();
    let mut images: Vec<Polynomial> = Vec::new();
    for (f, state) in family {
        homomorphism.push(verify_homomorphism(f)?);
        injectivity.push(injectivity_probe(f, d)?);
        correspondence.push(verify_state_correspondence(f, state, target_state, mode, 2 * d)?);
        images.extend(f.images()?);
    }
    let generation = verify_generation(&target, &images, d)?;
    let pcp = pcp_check(&target, family, &[], d, options).map_err(|e| ContextError::Unification(e.to_string()))?;

    let homomorphism_ok = homomorphism.iter().all(|r| r.passed);
    let injectivity_ok = injectivity.iter().all(|r| r.passed);
    let correspondence_ok = correspondence.iter().all(|r| r.passed);
    let generation_ok = generation_mode == GenerationMode::Subalgebra || generation.passed;
    let pcp_ok = pcp.verdict.is_feasible();
    Ok(QuantizationVerdict {
        degree: d,
        passed: homomorphism_ok && injectivity_ok && correspondence_ok && generation_ok && pcp_ok,
        homomorphism_ok,
        injectivity_ok,
        correspondence_ok,
        generation_ok,
        pcp_ok,
        generation_mode,
        homomorphism,
        injectivity,
        correspondence,
        generation,
        pcp,
    })
}
