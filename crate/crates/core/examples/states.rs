//! Fock moments against pairing counts, and the Gibbs oscillator along a
//! shrinking h.

use ncq::algebra::{parse_presentation, reduce_text};
use ncq::state::{
    count_noncrossing_pair_matchings, gibbs_oscillator_evaluate, q_squared_closed_form, state_evaluate, StateSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = parse_presentation("class boltzmann; modes 1")?;
    println!("k   rewriting   pairings");
    for k in [2usize, 4, 6, 8, 10] {
        let x = reduce_text(&format!("(A + A†)^{k}"), &b)?;
        let value = state_evaluate(&StateSpec::Fock, &x, &b)?;
        println!("{k:<3} {:<11} {}", value.re, count_noncrossing_pair_matchings(&vec![0; k]));
    }

    let beta = 1.0;
    println!("\nh       <q^2>            (h/2)coth(beta h/2)   truncation");
    for h in [1.0, 0.3, 0.1, 0.03, 0.01] {
        let ccr = parse_presentation(&format!("class ccr; modes 1; param h={h}"))?;
        let q2 = reduce_text("q q", &ccr)?;
        let eval = gibbs_oscillator_evaluate(&q2, &ccr, beta, h, None)?;
        println!(
            "{h:<7} {:<16.12} {:<21.12} {}",
            eval.value.re,
            q_squared_closed_form(beta, h),
            eval.truncation
        );
    }
    Ok(())
}
