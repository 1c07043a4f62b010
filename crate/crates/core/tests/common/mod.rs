//! Random polynomials and the algebra invariants shared by the property and
//! acceptance suites.

#![allow(dead_code)]

use ncq::algebra::{normal_form, normal_form_with, parse_presentation, Polynomial, Presentation, RewriteStrategy, Word};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};

pub fn config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub type Terms = Vec<(Vec<u16>, i8, i8)>;

/// One to three terms with small Gaussian-integer coefficients.
pub fn terms(generators: u16, max_len: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec(
        (prop::collection::vec(0..generators, 0..=max_len), -3i8..=3, -3i8..=3),
        1..=3,
    )
}

pub fn poly(pres: &Presentation, t: &Terms) -> Polynomial {
    let g = pres.generators().len() as u16;
    let mut out = pres.zero();
    for (letters, re, im) in t {
        let w = pres.word_poly(Word::from_letters(letters.iter().map(|l| l % g).collect::<Vec<_>>()));
        out = out.add(&w.scale(Complex64::new(*re as f64, *im as f64))).unwrap();
    }
    out
}

pub fn close(a: &Polynomial, b: &Polynomial) -> bool {
    let scale = 1.0 + a.max_abs_coefficient().max(b.max_abs_coefficient());
    a.sub(b).unwrap().max_abs_coefficient() <= 1e-9 * scale
}

pub fn nf(x: &Polynomial, pres: &Presentation) -> Polynomial {
    normal_form(x, pres).unwrap()
}

pub fn algebras() -> Vec<Presentation> {
    vec![
        Presentation::boltzmann(2).unwrap(),
        Presentation::ccr(2, 1.0).unwrap(),
        Presentation::ccr(1, 0.37).unwrap(),
        Presentation::commutative(2).unwrap(),
        parse_presentation("gen a adj a*\nrule a a* -> a* a - 1").unwrap(),
        parse_presentation("gen X\ngen Z\nrule X X -> 1\nrule Z Z -> 1\nrule Z X -> -X Z").unwrap(),
    ]
}

pub fn single() -> impl Strategy<Value = (usize, Terms)> {
    (0usize..6, terms(4, 6))
}

pub fn pair() -> impl Strategy<Value = (usize, Terms, Terms)> {
    (0usize..6, terms(4, 4), terms(4, 4))
}

pub fn idempotence((which, t): (usize, Terms)) -> Result<(), TestCaseError> {
    let pres = &algebras()[which];
    let once = nf(&poly(pres, &t), pres);
    prop_assert!(close(&nf(&once, pres), &once));
    for w in once.terms().keys() {
        prop_assert!(pres.is_irreducible(w));
    }
    Ok(())
}

pub fn product_compatibility((which, a, b): (usize, Terms, Terms)) -> Result<(), TestCaseError> {
    let pres = &algebras()[which];
    let x = poly(pres, &a);
    let y = poly(pres, &b);
    let direct = nf(&x.multiply(&y).unwrap(), pres);
    let staged = nf(&nf(&x, pres).multiply(&nf(&y, pres)).unwrap(), pres);
    prop_assert!(close(&direct, &staged));
    Ok(())
}

pub fn anti_homomorphism((which, a, b): (usize, Terms, Terms)) -> Result<(), TestCaseError> {
    let pres = &algebras()[which];
    let x = poly(pres, &a);
    let y = poly(pres, &b);
    let left = nf(&pres.adjoint(&nf(&x.multiply(&y).unwrap(), pres)), pres);
    let right = nf(&nf(&pres.adjoint(&y), pres).multiply(&nf(&pres.adjoint(&x), pres)).unwrap(), pres);
    prop_assert!(close(&left, &right));
    Ok(())
}

pub fn classical_commutativity((_, a, b): (usize, Terms, Terms)) -> Result<(), TestCaseError> {
    let pres = Presentation::ccr(2, 0.0).unwrap();
    let x = poly(&pres, &a);
    let y = poly(&pres, &b);
    prop_assert!(close(&nf(&x.multiply(&y).unwrap(), &pres), &nf(&y.multiply(&x).unwrap(), &pres)));
    Ok(())
}

pub fn order_independence((which, t): (usize, Terms)) -> Result<(), TestCaseError> {
    let pres = &algebras()[which];
    let x = poly(pres, &t);
    let left = normal_form_with(&x, pres, RewriteStrategy::Leftmost).unwrap();
    let right = normal_form_with(&x, pres, RewriteStrategy::Rightmost).unwrap();
    prop_assert!(close(&left, &right));
    Ok(())
}
