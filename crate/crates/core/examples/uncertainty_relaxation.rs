//! Degree-1 moment matrix of one oscillator with ψ(q²) = ψ(p²) = v pinned.
//! Positivity holds exactly when v ≥ h/2.

use ncq::algebra::{parse_presentation, reduce_text, Word};
use ncq::feasibility::{build_moment_matrix, feasibility_solve, FeasibilityOptions};
use num_complex::Complex64;

fn word(text: &str, pres: &ncq::algebra::Presentation) -> Word {
    reduce_text(text, pres).unwrap().terms().keys().next().unwrap().clone()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ccr = parse_presentation("class ccr; modes 1; param h=1")?;
    let options = FeasibilityOptions::default();
    for v in [0.3, 0.4, 0.45, 0.55, 0.6, 0.8] {
        let pins = [
            (word("q q", &ccr), Complex64::new(v, 0.0)),
            (word("p p", &ccr), Complex64::new(v, 0.0)),
        ];
        let m = build_moment_matrix(&ccr, 1, &pins)?;
        let verdict = feasibility_solve(&m, &options);
        println!("v = {v:<5} v² - 1/4 = {:+.4}  {}", v * v - 0.25, verdict.label());
    }

    // the (p, q) entry carries the commutator
    let m = build_moment_matrix(&ccr, 1, &[])?;
    let basis: Vec<String> = m.basis().iter().map(|w| ccr.word_to_string(w)).collect();
    println!("\nbasis {basis:?}");
    for i in 0..m.size() {
        let row: Vec<String> = (0..m.size()).map(|j| ccr.poly_to_string(m.entry(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }
    Ok(())
}
