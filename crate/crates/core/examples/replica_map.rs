//! The replica context A ↦ (1/√p) Σ c_a A_a: a *-homomorphism exactly when
//! Σ|c_a|² = p, and then Fock moments are preserved.

use ncq::algebra::{parse_expression, Presentation};
use ncq::context::{apply_context, replica_context, verify_homomorphism};
use ncq::state::{state_evaluate, StateSpec};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = Presentation::boltzmann(1)?;
    let x = parse_expression("(A + A†)^6", &source)?;
    let c = |v: &[f64]| v.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>();

    for coefficients in [c(&[1.0, 1.0]), c(&[1.5, 0.5, 0.5f64.sqrt()]), c(&[1.0, 0.5])] {
        let f = replica_context(&coefficients)?;
        let report = verify_homomorphism(&f)?;
        let image = apply_context(&f, &x)?;
        let value = state_evaluate(&StateSpec::Fock, &image, f.target())?;
        println!("{}", f.label());
        println!("  homomorphism: {}", if report.passed { "yes" } else { "no" });
        for v in &report.violations {
            println!("  residual of {}: {}", v.rule, v.residual);
        }
        println!("  ψ(Δ(A + A†)^6) = {:.12}  (one-mode value 5)", value.re);
    }
    Ok(())
}
