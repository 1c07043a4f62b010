//! Trace moments of Wigner matrices against the one-mode Fock moments.

use ncq::wigner::{convergence_sweep, estimate_trace_moments, fock_prediction, sweep_csv, Ensemble, EnsembleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = EnsembleConfig::new(300, Ensemble::ComplexHermitian, 30, 7);
    println!("GUE N=300, 30 trials");
    for e in estimate_trace_moments(&config, 6)? {
        println!(
            "  k={} mean {:+.5} ± {:.5}   Fock {}",
            e.k,
            e.mean,
            e.stderr,
            fock_prediction(e.k)?
        );
    }

    let rows = convergence_sweep(&[50, 100, 200], 4, 20, 7, Ensemble::RealSymmetric)?;
    println!("\nGOE sweep\n{}", sweep_csv(&rows));
    Ok(())
}
