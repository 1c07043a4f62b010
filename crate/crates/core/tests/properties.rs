//! Randomized invariants of the algebra, context, feasibility and random
//! matrix layers.

mod common;

use common::{close, config, nf, poly, terms};
use nalgebra::DMatrix;
use ncq::algebra::{Presentation, Word};
use ncq::context::{apply_context, replica_context, verify_homomorphism, ContextMap};
use ncq::feasibility::{
    build_moment_matrix, density_marginal_feasible, feasibility_solve, FeasibilityOptions, FeasibilityVerdict,
    Marginal, Witness,
};
use ncq::state::{count_noncrossing_pair_matchings, fock_evaluate};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(1000, 11))]

    #[test]
    fn normal_form_is_idempotent(case in common::single()) {
        common::idempotence(case)?;
    }

    #[test]
    fn reduction_respects_products(case in common::pair()) {
        common::product_compatibility(case)?;
    }

    #[test]
    fn adjoint_reverses_products(case in common::pair()) {
        common::anti_homomorphism(case)?;
    }

    #[test]
    fn ccr_at_zero_h_commutes(case in common::pair()) {
        common::classical_commutativity(case)?;
    }

    #[test]
    fn reduction_order_does_not_matter(case in common::single()) {
        common::order_independence(case)?;
    }

    #[test]
    fn fock_moments_count_noncrossing_pairings(labels in prop::collection::vec(0usize..3, 0..=8)) {
        let pres = Presentation::boltzmann(3).unwrap();
        let mut x = pres.one();
        for &a in &labels {
            let ann = pres.word_poly(Word::letter((2 * a) as u16));
            x = nf(&x.multiply(&ann.add(&pres.adjoint(&ann)).unwrap()).unwrap(), &pres);
        }
        let value = fock_evaluate(&x, &pres).unwrap();
        prop_assert_eq!(value, Complex64::new(count_noncrossing_pair_matchings(&labels) as f64, 0.0));
    }
}

fn admissible(p: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), p).prop_filter_map("nonzero", move |raw| {
        let c: Vec<Complex64> = raw.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        (norm > 1e-3).then(|| {
            let s = (p as f64 / norm).sqrt();
            c.into_iter().map(|z| z * s).collect()
        })
    })
}

fn replica_case() -> impl Strategy<Value = Vec<Complex64>> {
    prop_oneof![admissible(2), admissible(3), admissible(5)]
}

proptest! {
    #![proptest_config(config(1000, 12))]

    #[test]
    fn contexts_commute_with_adjoint(c in replica_case(), t in terms(2, 4)) {
        let f = replica_context(&c).unwrap();
        let x = poly(f.source(), &t);
        let target = f.target();
        let lhs = apply_context(&f, &f.source().adjoint(&x)).unwrap();
        let rhs = nf(&target.adjoint(&apply_context(&f, &x).unwrap()), target);
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn contexts_are_multiplicative(c in replica_case(), a in terms(2, 3), b in terms(2, 3)) {
        let f = replica_context(&c).unwrap();
        let source = f.source();
        let x = poly(source, &a);
        let y = poly(source, &b);
        let lhs = apply_context(&f, &nf(&x.multiply(&y).unwrap(), source)).unwrap();
        let rhs = nf(&apply_context(&f, &x).unwrap().multiply(&apply_context(&f, &y).unwrap()).unwrap(), f.target());
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn embedded_semicircles_are_multiplicative(i in 1usize..=2, a in terms(1, 4), b in terms(1, 4)) {
        let source = Presentation::commutative(1).unwrap();
        let target = Presentation::boltzmann(2).unwrap();
        let map = std::collections::BTreeMap::from([("x".to_string(), format!("A{i} + A{i}†"))]);
        let f = ContextMap::from_text("X", &source, &target, &map).unwrap();
        let x = poly(&source, &a);
        let y = poly(&source, &b);
        let lhs = apply_context(&f, &nf(&x.multiply(&y).unwrap(), &source)).unwrap();
        let rhs = nf(&apply_context(&f, &x).unwrap().multiply(&apply_context(&f, &y).unwrap()).unwrap(), &target);
        prop_assert!(close(&lhs, &rhs));
    }
}

proptest! {
    #![proptest_config(config(100, 13))]

    #[test]
    fn replica_samples_pass_homomorphism(c in replica_case()) {
        prop_assert!(verify_homomorphism(&replica_context(&c).unwrap()).unwrap().passed);
    }
}

fn hankel_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-2.0f64..2.0, 3),
        prop::collection::vec(0.05f64..1.0, 3),
    )
        .prop_filter("distinct atoms", |(atoms, _)| {
            (0..3).all(|i| (0..i).all(|j| (atoms[i] - atoms[j]).abs() > 0.05))
        })
}

fn random_unitary(n: usize, raw: &[(f64, f64)]) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |r, c| {
        let (re, im) = raw[r * n + c];
        Complex64::new(re, im)
    });
    m.qr().q()
}

fn random_probabilities(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn density_witness(v: &FeasibilityVerdict, n: usize) -> DMatrix<Complex64> {
    match v {
        FeasibilityVerdict::Feasible {
            witness: Witness::Density(rows),
            ..
        } => DMatrix::from_fn(n, n, |r, c| rows[r][c].0),
        other => panic!("expected a density witness, got {other:?}"),
    }
}

fn reproduces(rho: &DMatrix<Complex64>, m: &Marginal) -> f64 {
    (0..m.probabilities.len())
        .map(|k| {
            let u = m.basis.column(k);
            ((u.adjoint() * rho * u)[(0, 0)].re - m.probabilities[k]).abs()
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(config(1000, 14))]

    #[test]
    fn moments_of_a_measure_are_feasible((atoms, weights) in hankel_case()) {
        let pres = Presentation::commutative(1).unwrap();
        let w = random_probabilities(&weights);
        let moment = |k: i32| -> f64 { atoms.iter().zip(&w).map(|(a, p)| p * a.powi(k)).sum() };
        let pins: Vec<(Word, Complex64)> = (1..=4)
            .map(|k| (Word::from_letters(vec![0u16; k]), Complex64::new(moment(k as i32), 0.0)))
            .collect();
        let m = build_moment_matrix(&pres, 2, &pins).unwrap();
        let verdict = feasibility_solve(&m, &FeasibilityOptions::default());
        match verdict {
            FeasibilityVerdict::Feasible { witness: Witness::Moments(values), .. } => {
                prop_assert!((values["x x x x"].0.re - moment(4)).abs() < 1e-9);
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn single_marginal_is_always_feasible(
        n in 2usize..=4,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        weights in prop::collection::vec(0.0f64..1.0, 4),
        zero in prop::option::of(0usize..4),
    ) {
        let mut w = weights[..n].to_vec();
        if let Some(z) = zero {
            w[z % n] = 0.0;
        }
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let m = Marginal { basis: random_unitary(n, &raw[..n * n]), probabilities: random_probabilities(&w) };
        let verdict = density_marginal_feasible(n, std::slice::from_ref(&m), &FeasibilityOptions::default()).unwrap();
        let rho = density_witness(&verdict, n);
        prop_assert!(reproduces(&rho, &m) < 1e-7);
    }
}

proptest! {
    #![proptest_config(config(50, 15))]

    #[test]
    fn uncertainty_verdict_follows_determinant(v in 0.3f64..0.8) {
        prop_assume!((v - 0.5).abs() > 0.05);
        let pres = Presentation::ccr(1, 1.0).unwrap();
        let q2 = Word::from_letters(vec![0u16, 0]);
        let p2 = Word::from_letters(vec![1u16, 1]);
        let m = build_moment_matrix(&pres, 1, &[(q2, Complex64::new(v, 0.0)), (p2, Complex64::new(v, 0.0))]).unwrap();
        let verdict = feasibility_solve(&m, &FeasibilityOptions::default());
        if v * v > 0.25 {
            prop_assert!(verdict.is_feasible(), "v={v}: {verdict:?}");
        } else {
            prop_assert!(verdict.is_infeasible(), "v={v}: {verdict:?}");
        }
    }
}

mod wigner {
    use ncq::wigner::{estimate_trace_moments, Ensemble, EnsembleConfig};

    #[test]
    fn fixed_config_is_deterministic() {
        for ensemble in [Ensemble::RealSymmetric, Ensemble::ComplexHermitian] {
            let config = EnsembleConfig::new(40, ensemble, 8, 99);
            assert_eq!(estimate_trace_moments(&config, 6).unwrap(), estimate_trace_moments(&config, 6).unwrap());
        }
    }

    #[test]
    fn disjoint_seeds_agree_within_four_stderr() {
        for (s1, s2) in [(1u64, 2u64), (7, 1_000_003), (42, 4242)] {
            let a = estimate_trace_moments(&EnsembleConfig::new(60, Ensemble::RealSymmetric, 40, s1), 4).unwrap();
            let b = estimate_trace_moments(&EnsembleConfig::new(60, Ensemble::RealSymmetric, 40, s2), 4).unwrap();
            assert_ne!(a, b);
            for (x, y) in a.iter().zip(&b) {
                let combined = (x.stderr.powi(2) + y.stderr.powi(2)).sqrt();
                assert!((x.mean - y.mean).abs() <= 4.0 * combined, "seeds {s1},{s2} k={}", x.k);
            }
        }
    }

    #[test]
    fn quadrupled_trials_halve_stderr() {
        let small = estimate_trace_moments(&EnsembleConfig::new(60, Ensemble::RealSymmetric, 100, 5), 4).unwrap();
        let large = estimate_trace_moments(&EnsembleConfig::new(60, Ensemble::RealSymmetric, 400, 5), 4).unwrap();
        for (s, l) in small.iter().zip(&large) {
            let ratio = l.stderr / s.stderr;
            assert!((ratio - 0.5).abs() <= 0.15, "k={} ratio {ratio}", s.k);
        }
    }
}
