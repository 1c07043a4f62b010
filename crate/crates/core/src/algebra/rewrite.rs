use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;

use super::poly::Polynomial;
use super::presentation::Presentation;
use super::word::Word;
use super::AlgebraError;

/// Coefficients below this magnitude are dropped after every reduction pass.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Which redex of a word is rewritten first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RewriteStrategy {
    #[default]
    Leftmost,
    Rightmost,
}

fn find_redex(word: &Word, pres: &Presentation, strategy: RewriteStrategy) -> Option<usize> {
    let letters = word.letters();
    if letters.len() < 2 {
        return None;
    }
    let hit = |i: &usize| pres.rule_at(letters[*i], letters[*i + 1]).is_some();
    match strategy {
        RewriteStrategy::Leftmost => (0..letters.len() - 1).find(hit),
        RewriteStrategy::Rightmost => (0..letters.len() - 1).rev().find(hit),
    }
}

/// Reduces `x` with the leftmost strategy.
pub fn normal_form(x: &Polynomial, pres: &Presentation) -> Result<Polynomial, AlgebraError> {
    normal_form_with(x, pres, RewriteStrategy::Leftmost)
}

/// Rewrites every word at one redex per pass until no rule applies.
///
/// Custom presentations are bounded by the presentation's step budget; preset
/// classes always terminate.
pub fn normal_form_with(
    x: &Polynomial,
    pres: &Presentation,
    strategy: RewriteStrategy,
) -> Result<Polynomial, AlgebraError> {
    if x.space() != pres.space() {
        return Err(AlgebraError::MismatchedPresentations);
    }
    let budget = if pres.class().is_preset() {
        usize::MAX
    } else {
        pres.step_budget()
    };
    let mut current: BTreeMap<Word, Complex64> = x.terms().clone();
    let mut history: VecDeque<String> = VecDeque::with_capacity(3);
    let mut steps = 0usize;
    loop {
        let mut next: BTreeMap<Word, Complex64> = BTreeMap::new();
        let mut changed = false;
        for (word, coef) in &current {
            match find_redex(word, pres, strategy) {
                None => *next.entry(word.clone()).or_default() += coef,
                Some(i) => {
                    changed = true;
                    steps += 1;
                    let letters = word.letters();
                    let rule = pres.rule_at(letters[i], letters[i + 1]).expect("redex has a rule");
                    let prefix = word.slice(0..i);
                    let suffix = word.slice(i + 2..letters.len());
                    for (rw, rc) in rule.right.terms() {
                        let w = prefix.concat(rw).concat(&suffix);
                        *next.entry(w).or_default() += coef * rc;
                    }
                }
            }
        }
        next.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        if !changed {
            return Ok(Polynomial::from_terms(x.space(), next));
        }
        if steps > budget {
            return Err(AlgebraError::NonTermination {
                steps,
                last: history.into_iter().collect(),
            });
        }
        if !pres.class().is_preset() {
            if history.len() == 3 {
                history.pop_front();
            }
            let snapshot = Polynomial::from_terms(x.space(), next.clone());
            history.push_back(pres.poly_to_string(&snapshot));
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_expression, parse_presentation};

    fn nf_text(text: &str, pres: &Presentation) -> Polynomial {
        normal_form(&parse_expression(text, pres).unwrap(), pres).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn boltzmann_contractions() {
        let b = parse_presentation("class boltzmann; modes 2").unwrap();
        assert_eq!(nf_text("A1 A1'", &b), b.one());
        assert!(nf_text("A1 A2'", &b).is_zero());
        // annihilators to the right of creators stay
        let x = nf_text("A1' A1", &b);
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn ccr_reorders_with_commutator() {
        let p = parse_presentation("class ccr; modes 1; param h=1").unwrap();
        let x = nf_text("p q", &p);
        assert_eq!(x, parse_expression("q p - i", &p).unwrap());
    }

    #[test]
    fn ccr_pbw_order_multi_mode() {
        let p = parse_presentation("class ccr; modes 2; param h=1").unwrap();
        let x = nf_text("p2 q2 p1 q1", &p);
        // sorted q-block then p-block; constant pieces from both contractions
        for w in x.terms().keys() {
            let names: Vec<&str> = w
                .letters()
                .iter()
                .map(|&g| p.generators()[g as usize].name.as_str())
                .collect();
            let mut sorted = names.clone();
            sorted.sort_by_key(|n| (n.starts_with('p'), n.to_string()));
            assert_eq!(names, sorted);
        }
        assert_eq!(x.constant_term(), c(-1.0, 0.0));
    }

    #[test]
    fn counterexample_relation() {
        let p = parse_presentation("class custom; gen a adj a*; rule a a* -> a* a - 1").unwrap();
        assert_eq!(nf_text("a a*", &p), parse_expression("a* a - 1", &p).unwrap());
    }

    #[test]
    fn custom_non_termination_reports_history() {
        let mut p = parse_presentation("gen x; gen y; rule x y -> y x; rule y x -> x y").unwrap();
        p.set_step_budget(50);
        let err = normal_form(&parse_expression("x y", &p).unwrap(), &p).unwrap_err();
        match err {
            AlgebraError::NonTermination { last, .. } => assert_eq!(last.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tiny_coefficients_pruned() {
        let p = parse_presentation("class ccr; modes 1; param h=1e-13").unwrap();
        let x = nf_text("p q", &p);
        assert_eq!(x.len(), 1);
    }
}
