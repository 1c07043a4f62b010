use crate::algebra::{GenId, Presentation, Word};

use super::FeasibilityError;

/// Basis size cap used when `NCQ_MAX_BASIS` is unset.
pub const DEFAULT_BASIS_CAP: usize = 2000;

/// The basis cap, honoring the `NCQ_MAX_BASIS` environment variable.
pub fn basis_cap() -> usize {
    std::env::var("NCQ_MAX_BASIS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BASIS_CAP)
}

/// All irreducible words of length at most `d`, in length-lexicographic order.
pub fn enumerate_basis_words(pres: &Presentation, d: usize) -> Result<Vec<Word>, FeasibilityError> {
    enumerate_basis_words_capped(pres, d, basis_cap())
}

pub fn enumerate_basis_words_capped(
    pres: &Presentation,
    d: usize,
    cap: usize,
) -> Result<Vec<Word>, FeasibilityError> {
    if d == 0 {
        return Err(FeasibilityError::InvalidDegree(d));
    }
    let letters = pres.generators().len() as GenId;
    let mut out = vec![Word::unit()];
    let mut layer = vec![Word::unit()];
    for _ in 0..d {
        let mut next = Vec::new();
        for w in &layer {
            for g in 0..letters {
                // rules have two-letter left sides, so only the new suffix can match
                let reducible = w.letters().last().is_some_and(|&last| pres.rule_at(last, g).is_some());
                if !reducible {
                    next.push(w.pushed(g));
                }
            }
        }
        out.extend(next.iter().cloned());
        if out.len() > cap {
            return Err(FeasibilityError::BasisTooLarge { size: out.len(), cap });
        }
        layer = next;
    }
    out.sort();
    Ok(out)
}
