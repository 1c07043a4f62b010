//! Density matrices with prescribed outcome statistics in two bases.

use nalgebra::DMatrix;
use ncq::feasibility::{density_marginal_feasible, FeasibilityOptions, FeasibilityVerdict, Marginal, Witness};
use num_complex::Complex64;

fn hadamard(probabilities: Vec<f64>) -> Marginal {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Marginal {
        basis: DMatrix::from_row_slice(2, 2, &[s, s, s, -s]),
        probabilities,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let options = FeasibilityOptions::default();
    let cases = [
        ("Z=(1,0)   X=(1,0)", vec![Marginal::computational(vec![1.0, 0.0]), hadamard(vec![1.0, 0.0])]),
        ("Z=(1,0)   X=(½,½)", vec![Marginal::computational(vec![1.0, 0.0]), hadamard(vec![0.5, 0.5])]),
        ("Z=(.8,.2) X=(.7,.3)", vec![Marginal::computational(vec![0.8, 0.2]), hadamard(vec![0.7, 0.3])]),
    ];
    for (name, marginals) in cases {
        let verdict = density_marginal_feasible(2, &marginals, &options)?;
        println!("{name:<20} {}", verdict.label());
        match verdict {
            FeasibilityVerdict::Feasible {
                witness: Witness::Density(rho),
                ..
            } => {
                for row in rho {
                    let cells: Vec<String> = row.iter().map(|z| format!("{:+.4}{:+.4}i", z.0.re, z.0.im)).collect();
                    println!("    {}", cells.join("  "));
                }
            }
            FeasibilityVerdict::InfeasibleCertified { reason } => println!("    {reason}"),
            _ => {}
        }
    }
    Ok(())
}
