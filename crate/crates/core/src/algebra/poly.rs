use std::collections::BTreeMap;

use num_complex::Complex64;

use super::word::Word;
use super::AlgebraError;

/// Fingerprint of the generator set a polynomial lives over.
///
/// Presentations that differ only in parameter values (for instance the same
/// CCR algebra at two values of `h`) share a fingerprint, so polynomials move
/// freely between them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceId(pub u64);

/// Finite linear combination of words with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    space: SpaceId,
    terms: BTreeMap<Word, Complex64>,
}

impl Polynomial {
    pub fn zero(space: SpaceId) -> Self {
        Polynomial {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(space: SpaceId, value: Complex64) -> Self {
        Self::monomial(space, Word::unit(), value)
    }

    pub fn one(space: SpaceId) -> Self {
        Self::scalar(space, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(space: SpaceId, word: Word, coefficient: Complex64) -> Self {
        let mut p = Self::zero(space);
        p.add_term(word, coefficient);
        p
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn terms(&self) -> &BTreeMap<Word, Complex64> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Word, Complex64> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word length carrying a nonzero coefficient; 0 for scalars and zero.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn coefficient(&self, word: &Word) -> Complex64 {
        self.terms.get(word).copied().unwrap_or_default()
    }

    /// Coefficient of the unit word.
    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(&Word::unit())
    }

    pub fn add_term(&mut self, word: Word, coefficient: Complex64) {
        if coefficient == Complex64::default() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(slot) => {
                slot.insert(coefficient);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coefficient;
                if *slot.get() == Complex64::default() {
                    slot.remove();
                }
            }
        }
    }

    fn check_space(&self, other: &Polynomial) -> Result<(), AlgebraError> {
        if self.space != other.space {
            return Err(AlgebraError::MismatchedPresentations);
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -*c);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        let mut out = Polynomial::zero(self.space);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * factor);
        }
        out
    }

    /// Free-algebra product: distributive concatenation, no reduction.
    pub fn multiply(&self, other: &Polynomial) -> Result<Polynomial, AlgebraError> {
        self.check_space(other)?;
        let mut out = Polynomial::zero(self.space);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// Drops coefficients whose magnitude is below `threshold`.
    pub fn pruned(mut self, threshold: f64) -> Polynomial {
        self.terms.retain(|_, c| c.norm() >= threshold);
        self
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn from_terms(space: SpaceId, terms: BTreeMap<Word, Complex64>) -> Self {
        let mut p = Polynomial::zero(space);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: SpaceId = SpaceId(7);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_law() {
        let x = Polynomial::monomial(S, Word::from_letters(vec![0, 1]), c(2.0, -1.0));
        assert_eq!(Polynomial::one(S).multiply(&x).unwrap(), x);
        assert_eq!(x.multiply(&Polynomial::one(S)).unwrap(), x);
    }

    #[test]
    fn cancellation_removes_term() {
        let x = Polynomial::monomial(S, Word::letter(0), c(1.0, 0.0));
        assert!(x.sub(&x).unwrap().is_zero());
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let x = Polynomial::one(S);
        let y = Polynomial::one(SpaceId(8));
        assert!(matches!(
            x.multiply(&y),
            Err(AlgebraError::MismatchedPresentations)
        ));
    }

    #[test]
    fn expansion_of_sum_times_difference() {
        let q = Polynomial::monomial(S, Word::letter(0), c(1.0, 0.0));
        let p = Polynomial::monomial(S, Word::letter(1), c(1.0, 0.0));
        let lhs = q.add(&p).unwrap().multiply(&q.sub(&p).unwrap()).unwrap();
        assert_eq!(lhs.len(), 4);
        assert_eq!(lhs.coefficient(&Word::from_letters(vec![0, 0])), c(1.0, 0.0));
        assert_eq!(lhs.coefficient(&Word::from_letters(vec![0, 1])), c(-1.0, 0.0));
        assert_eq!(lhs.coefficient(&Word::from_letters(vec![1, 0])), c(1.0, 0.0));
        assert_eq!(lhs.coefficient(&Word::from_letters(vec![1, 1])), c(-1.0, 0.0));
    }
}
