use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{normal_form, Polynomial, Presentation, Word};
use crate::complex_value::ComplexValue;

use super::engine::{self, HermitianAffine};
use super::{enumerate_basis_words, verdict_from, FeasibilityError, FeasibilityOptions, FeasibilityVerdict, Witness};

const FIXED_TOL: f64 = 1e-9;

/// Unknown moment `ψ(word)` of a canonical word.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVariable {
    pub word: Word,
    /// Set when a pin fixes this word alone.
    pub fixed: Option<Complex64>,
}

/// Linear constraint `ψ(form) = value` on a canonical polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPin {
    pub form: Polynomial,
    pub value: Complex64,
}

impl LinearPin {
    /// The pinned word when the form is a single word with coefficient 1.
    pub fn single_word(&self) -> Option<&Word> {
        match self.form.terms().iter().next() {
            Some((w, c)) if self.form.len() == 1 && *c == Complex64::new(1.0, 0.0) => Some(w),
            _ => None,
        }
    }
}

/// Moment matrix `[ψ(nf(w* v))]` over the degree-≤d basis.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    presentation: Presentation,
    degree: usize,
    basis: Vec<Word>,
    entries: Vec<Polynomial>,
    variables: Vec<MomentVariable>,
    index: BTreeMap<Word, usize>,
    pins: Vec<LinearPin>,
}

/// Builds the degree-`d` moment matrix with the given words fixed.
pub fn build_moment_matrix(
    pres: &Presentation,
    d: usize,
    fixed: &[(Word, Complex64)],
) -> Result<MomentMatrix, FeasibilityError> {
    for (word, value) in fixed {
        if !pres.is_irreducible(word) {
            return Err(FeasibilityError::NonCanonicalWord(pres.word_to_string(word)));
        }
        if word.is_empty() && (*value - Complex64::new(1.0, 0.0)).norm() > FIXED_TOL {
            return Err(FeasibilityError::UnitNotOne(crate::algebra::format_complex(*value)));
        }
    }
    let known: BTreeMap<Word, Complex64> = fixed.iter().cloned().collect();
    for (word, value) in fixed {
        if known[word] != *value {
            return Err(FeasibilityError::HermitianInconsistency(pres.word_to_string(word)));
        }
        let adj = normal_form(&pres.adjoint(&pres.word_poly(word.clone())), pres)?;
        let image: Option<Complex64> = adj
            .terms()
            .iter()
            .map(|(w, c)| known.get(w).map(|v| c * v))
            .sum();
        if let Some(image) = image {
            if (image - value.conj()).norm() > FIXED_TOL {
                return Err(FeasibilityError::HermitianInconsistency(pres.word_to_string(word)));
            }
        }
    }
    let pins = fixed
        .iter()
        .map(|(w, v)| LinearPin {
            form: pres.word_poly(w.clone()),
            value: *v,
        })
        .collect();
    MomentMatrix::with_pins(pres, d, pins)
}

impl MomentMatrix {
    /// Builds the matrix with general linear pins. Pin forms must be canonical
    /// and of degree at most `2d`.
    pub fn with_pins(pres: &Presentation, d: usize, pins: Vec<LinearPin>) -> Result<Self, FeasibilityError> {
        let basis = enumerate_basis_words(pres, d)?;
        for pin in &pins {
            for w in pin.form.terms().keys() {
                if !pres.is_irreducible(w) {
                    return Err(FeasibilityError::NonCanonicalWord(pres.word_to_string(w)));
                }
                if w.len() > 2 * d {
                    return Err(FeasibilityError::DegreeTooHigh {
                        word: pres.word_to_string(w),
                        degree: w.len(),
                        limit: 2 * d,
                    });
                }
            }
        }
        let m = basis.len();
        let mut entries = Vec::with_capacity(m * m);
        for w in &basis {
            let left = pres.word_poly(pres.adjoint_word(w));
            for v in &basis {
                let product = left.multiply(&pres.word_poly(v.clone()))?;
                entries.push(normal_form(&product, pres)?);
            }
        }

        // every word in an entry or a pin, closed under w ↦ nf(w*)
        let mut words: BTreeSet<Word> = entries.iter().flat_map(|e| e.terms().keys().cloned()).collect();
        words.extend(pins.iter().flat_map(|p| p.form.terms().keys().cloned()));
        words.insert(Word::unit());
        let mut queue: Vec<Word> = words.iter().cloned().collect();
        while let Some(w) = queue.pop() {
            let adj = normal_form(&pres.word_poly(pres.adjoint_word(&w)), pres)?;
            for u in adj.terms().keys() {
                if words.insert(u.clone()) {
                    queue.push(u.clone());
                }
            }
        }
        let index: BTreeMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let mut variables: Vec<MomentVariable> = words
            .into_iter()
            .map(|word| MomentVariable { word, fixed: None })
            .collect();
        variables[index[&Word::unit()]].fixed = Some(Complex64::new(1.0, 0.0));
        for pin in &pins {
            if let Some(w) = pin.single_word() {
                variables[index[w]].fixed = Some(pin.value);
            }
        }
        Ok(MomentMatrix {
            presentation: pres.clone(),
            degree: d,
            basis,
            entries,
            variables,
            index,
            pins,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// `nf(w_i* w_j)` as a polynomial in canonical words.
    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.basis.len() + j]
    }

    pub fn variables(&self) -> &[MomentVariable] {
        &self.variables
    }

    pub fn pins(&self) -> &[LinearPin] {
        &self.pins
    }

    /// Value of entry `(i, j)` when every word it involves is in `known`.
    pub fn entry_value(&self, i: usize, j: usize, known: &BTreeMap<Word, Complex64>) -> Option<Complex64> {
        self.entry(i, j)
            .terms()
            .iter()
            .map(|(w, c)| known.get(w).map(|v| c * v))
            .sum()
    }

    /// The matrix evaluated at an assignment of every variable.
    pub fn evaluate(&self, known: &BTreeMap<Word, Complex64>) -> Option<DMatrix<Complex64>> {
        let m = self.size();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.entry_value(i, j, known)?;
            }
        }
        Some(out)
    }

    fn problem(&self) -> Result<HermitianAffine, FeasibilityError> {
        let pres = &self.presentation;
        let m = self.size();
        let n = 2 * self.variables.len();
        let mut contributions = vec![Vec::new(); n];
        for i in 0..m {
            for j in i..m {
                for (w, c) in self.entry(i, j).terms() {
                    let k = self.index[w];
                    contributions[2 * k].push((i, j, *c));
                    contributions[2 * k + 1].push((i, j, c * Complex64::i()));
                }
            }
        }
        let mut constraints = Vec::new();
        // Σ c_u z_u = value, split into real and imaginary rows
        let mut linear = |form: &[(usize, Complex64)], conj_of: Option<usize>, value: Complex64| {
            let mut re = vec![0.0; n];
            let mut im = vec![0.0; n];
            for &(k, c) in form {
                re[2 * k] += c.re;
                re[2 * k + 1] -= c.im;
                im[2 * k] += c.im;
                im[2 * k + 1] += c.re;
            }
            if let Some(k) = conj_of {
                re[2 * k] -= 1.0;
                im[2 * k + 1] += 1.0;
            }
            constraints.push((re, value.re));
            constraints.push((im, value.im));
        };
        linear(&[(self.index[&Word::unit()], Complex64::new(1.0, 0.0))], None, Complex64::new(1.0, 0.0));
        for (k, var) in self.variables.iter().enumerate() {
            // ψ(nf(w*)) − conj ψ(w) = 0
            let adj = normal_form(&pres.word_poly(pres.adjoint_word(&var.word)), pres)?;
            let form: Vec<(usize, Complex64)> = adj.terms().iter().map(|(w, c)| (self.index[w], *c)).collect();
            linear(&form, Some(k), Complex64::default());
        }
        for pin in &self.pins {
            let form: Vec<(usize, Complex64)> = pin.form.terms().iter().map(|(w, c)| (self.index[w], *c)).collect();
            linear(&form, None, pin.value);
        }
        let labels = self.basis.iter().map(|w| pres.word_to_string(w)).collect();
        Ok(HermitianAffine {
            dim: m,
            contributions,
            constraints,
            labels,
        })
    }
}

/// Decides whether the pinned moments extend to a PSD moment matrix.
pub fn feasibility_solve(matrix: &MomentMatrix, options: &FeasibilityOptions) -> FeasibilityVerdict {
    let problem = match matrix.problem() {
        Ok(p) => p,
        Err(e) => {
            return FeasibilityVerdict::InfeasibleCertified {
                reason: e.to_string(),
            }
        }
    };
    let start = DMatrix::<Complex64>::identity(problem.dim, problem.dim);
    let outcome = engine::solve(&problem, &start, options);
    let pres = &matrix.presentation;
    verdict_from(outcome, |x, _| {
        Witness::Moments(
            matrix
                .variables
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    (
                        pres.word_to_string(&v.word),
                        ComplexValue(Complex64::new(x[2 * k], x[2 * k + 1])),
                    )
                })
                .collect(),
        )
    })
}
