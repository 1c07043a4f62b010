use std::cmp::Ordering;

/// Index of a generator inside its owning presentation.
pub type GenId = u16;

/// A monomial: an ordered product of generators. The empty word is the unit.
///
/// Words order length-first, then lexicographically by generator index, which
/// gives the deterministic length-lexicographic bases used everywhere else.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<GenId>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn letter(id: GenId) -> Self {
        Word(vec![id])
    }

    pub fn from_letters(letters: impl Into<Vec<GenId>>) -> Self {
        Word(letters.into())
    }

    pub fn letters(&self) -> &[GenId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + other.0.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Word with one more letter appended on the right.
    pub fn pushed(&self, id: GenId) -> Word {
        let mut letters = self.0.clone();
        letters.push(id);
        Word(letters)
    }

    pub(crate) fn slice(&self, range: std::ops::Range<usize>) -> Word {
        Word(self.0[range].to_vec())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_lexicographic_order() {
        let mut words = vec![
            Word::from_letters(vec![1, 0]),
            Word::letter(2),
            Word::unit(),
            Word::from_letters(vec![0, 1]),
            Word::letter(0),
        ];
        words.sort();
        assert_eq!(
            words,
            vec![
                Word::unit(),
                Word::letter(0),
                Word::letter(2),
                Word::from_letters(vec![0, 1]),
                Word::from_letters(vec![1, 0]),
            ]
        );
    }

    #[test]
    fn concat_with_unit_is_identity() {
        let w = Word::from_letters(vec![3, 1, 4]);
        assert_eq!(w.concat(&Word::unit()), w);
        assert_eq!(Word::unit().concat(&w), w);
    }
}
