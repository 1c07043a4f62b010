//! The classical Gaussian variable x sent to q and to p of one quantum
//! oscillator, checked against the Gibbs state as h shrinks.

use std::collections::BTreeMap;

use ncq::algebra::parse_presentation;
use ncq::context::{contextual_quantization_verify, ContextMap, CorrespondenceMode, GenerationMode};
use ncq::feasibility::FeasibilityOptions;
use ncq::state::StateSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 1.0;
    let source = parse_presentation("class commutative; modes 1")?;
    let target = parse_presentation("class ccr; modes 1; param h=1")?;
    let classical = StateSpec::Gaussian { sigma: (1.0 / beta as f64).sqrt() };
    let family = vec![
        (ContextMap::from_text("f", &source, &target, &BTreeMap::from([("x".into(), "q".into())]))?, classical.clone()),
        (ContextMap::from_text("g", &source, &target, &BTreeMap::from([("x".into(), "p".into())]))?, classical),
    ];
    let gibbs = StateSpec::GibbsOscillator { beta, h: 1.0, truncation: None };
    let mode = CorrespondenceMode::Limit {
        schedule: vec![1.0, 0.3, 0.1, 0.03, 0.01],
        tolerance: 5e-3,
    };
    let verdict = contextual_quantization_verify(&family, &gibbs, &mode, 2, GenerationMode::Full, &FeasibilityOptions::default())?;

    for report in &verdict.correspondence {
        println!("context {}", report.context);
        for p in &report.points {
            println!("  h = {:<5} max error {:.3e}", p.h.unwrap_or(f64::NAN), p.max_error);
        }
    }
    println!(
        "homomorphism {} injectivity {} correspondence {} generation {} unification {}",
        verdict.homomorphism_ok, verdict.injectivity_ok, verdict.correspondence_ok, verdict.generation_ok, verdict.pcp_ok
    );
    println!("overall: {}", if verdict.passed { "pass" } else { "fail" });
    Ok(())
}
