use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::complex_value::ComplexValue;

use super::engine::{self, HermitianAffine};
use super::{verdict_from, FeasibilityError, FeasibilityOptions, FeasibilityVerdict, Witness};

const UNITARY_TOL: f64 = 1e-10;
const PROBABILITY_TOL: f64 = 1e-9;
const ZERO_PROBABILITY: f64 = 1e-12;

/// Outcome distribution of a measurement in the basis given by the columns
/// of `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    pub basis: DMatrix<Complex64>,
    pub probabilities: Vec<f64>,
}

impl Marginal {
    /// Measurement in the computational basis.
    pub fn computational(probabilities: Vec<f64>) -> Self {
        let n = probabilities.len();
        Marginal {
            basis: DMatrix::identity(n, n),
            probabilities,
        }
    }
}

fn validate(n: usize, marginals: &[Marginal]) -> Result<(), FeasibilityError> {
    for (index, m) in marginals.iter().enumerate() {
        if m.basis.nrows() != n || m.basis.ncols() != n || m.probabilities.len() != n {
            return Err(FeasibilityError::InvalidProbabilities {
                index,
                message: format!("expected dimension {n}"),
            });
        }
        let product = &m.basis * m.basis.adjoint();
        let deviation = (product - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        if deviation > UNITARY_TOL {
            return Err(FeasibilityError::NonUnitary { index, deviation });
        }
        if let Some(p) = m.probabilities.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(FeasibilityError::InvalidProbabilities {
                index,
                message: format!("probability {p} is negative"),
            });
        }
        let total: f64 = m.probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(FeasibilityError::InvalidProbabilities {
                index,
                message: format!("probabilities sum to {total}"),
            });
        }
    }
    Ok(())
}

/// Is there a density matrix whose outcome distribution in each given basis
/// matches the given probabilities?
pub fn density_marginal_feasible(
    n: usize,
    marginals: &[Marginal],
    options: &FeasibilityOptions,
) -> Result<FeasibilityVerdict, FeasibilityError> {
    validate(n, marginals)?;
    // unknowns: diagonal entries, then real and imaginary parts above it
    let mut contributions = Vec::new();
    for i in 0..n {
        contributions.push(vec![(i, i, Complex64::new(1.0, 0.0))]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            contributions.push(vec![(i, j, Complex64::new(1.0, 0.0))]);
            contributions.push(vec![(i, j, Complex64::i())]);
        }
    }
    let mut problem = HermitianAffine {
        dim: n,
        contributions,
        constraints: Vec::new(),
        labels: (0..n).map(|i| format!("|{i}⟩")).collect(),
    };
    let unknowns = problem.unknowns();
    let units: Vec<DMatrix<Complex64>> = (0..unknowns)
        .map(|k| {
            let mut e = vec![0.0; unknowns];
            e[k] = 1.0;
            problem.matrix_of(&e)
        })
        .collect();

    let mut constraints = vec![((0..unknowns).map(|k| if k < n { 1.0 } else { 0.0 }).collect(), 1.0)];
    for m in marginals {
        for (k, &p) in m.probabilities.iter().enumerate() {
            let u = m.basis.column(k).into_owned();
            let row = units
                .iter()
                .map(|b| (u.adjoint() * b * &u)[(0, 0)].re)
                .collect();
            constraints.push((row, p));
            if p <= ZERO_PROBABILITY {
                // ⟨u|ρ|u⟩ = 0 with ρ ⪰ 0 forces ρ u = 0
                let support: Vec<usize> = (0..n).collect();
                let v: Vec<Complex64> = u.iter().copied().collect();
                for row in problem.kernel_rows(&support, &v) {
                    constraints.push((row, 0.0));
                }
            }
        }
    }
    problem.constraints = constraints;
    let start = DMatrix::<Complex64>::identity(n, n) / Complex64::new(n as f64, 0.0);
    let outcome = engine::solve(&problem, &start, options);
    Ok(verdict_from(outcome, |_, rho| {
        Witness::Density(
            (0..n)
                .map(|r| (0..n).map(|c| ComplexValue(rho[(r, c)])).collect())
                .collect(),
        )
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hadamard() -> DMatrix<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(2, 2, &[s, s, s, -s]).map(|x| Complex64::new(x, 0.0))
    }

    fn density(v: &FeasibilityVerdict) -> DMatrix<Complex64> {
        match v {
            FeasibilityVerdict::Feasible {
                witness: Witness::Density(rows),
                ..
            } => DMatrix::from_fn(rows.len(), rows.len(), |r, c| rows[r][c].0),
            other => panic!("expected a density witness, got {other:?}"),
        }
    }

    #[test]
    fn single_marginal_gives_diagonal() {
        let opts = FeasibilityOptions::default();
        let v = density_marginal_feasible(2, &[Marginal::computational(vec![1.0, 0.0])], &opts).unwrap();
        let rho = density(&v);
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-9);
        assert!(rho[(1, 1)].norm() < 1e-9 && rho[(0, 1)].norm() < 1e-9);
    }

    #[test]
    fn sharp_in_both_bases_is_impossible() {
        let opts = FeasibilityOptions::default();
        let marginals = [
            Marginal::computational(vec![1.0, 0.0]),
            Marginal {
                basis: hadamard(),
                probabilities: vec![1.0, 0.0],
            },
        ];
        let v = density_marginal_feasible(2, &marginals, &opts).unwrap();
        assert!(v.is_infeasible(), "{v:?}");
    }

    #[test]
    fn sharp_and_uniform_is_diag_one_zero() {
        let opts = FeasibilityOptions::default();
        let marginals = [
            Marginal::computational(vec![1.0, 0.0]),
            Marginal {
                basis: hadamard(),
                probabilities: vec![0.5, 0.5],
            },
        ];
        let v = density_marginal_feasible(2, &marginals, &opts).unwrap();
        let rho = density(&v);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]).map(|x| Complex64::new(x, 0.0));
        assert!((rho - expected).iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn interior_point_is_found() {
        let opts = FeasibilityOptions::default();
        let marginals = [
            Marginal::computational(vec![0.7, 0.3]),
            Marginal {
                basis: hadamard(),
                probabilities: vec![0.6, 0.4],
            },
        ];
        let v = density_marginal_feasible(2, &marginals, &opts).unwrap();
        let rho = density(&v);
        assert!((rho[(0, 0)].re - 0.7).abs() < 1e-9);
        // ⟨+|ρ|+⟩ = ½ + Re ρ01
        assert!((0.5 + rho[(0, 1)].re - 0.6).abs() < 1e-9);
    }

    #[test]
    fn input_validation() {
        let opts = FeasibilityOptions::default();
        let skew = Marginal {
            basis: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]).map(|x| Complex64::new(x, 0.0)),
            probabilities: vec![0.5, 0.5],
        };
        assert!(matches!(
            density_marginal_feasible(2, &[skew], &opts),
            Err(FeasibilityError::NonUnitary { index: 0, .. })
        ));
        assert!(matches!(
            density_marginal_feasible(2, &[Marginal::computational(vec![1.2, -0.2])], &opts),
            Err(FeasibilityError::InvalidProbabilities { index: 0, .. })
        ));
    }
}
