//! Truncated moment-matrix feasibility: can given moments be extended to a
//! positive state? Also the finite-dimensional density-matrix marginal
//! problem.

mod basis;
mod engine;
mod marginal;
mod moment_matrix;
mod pcp;

pub use basis::{basis_cap, enumerate_basis_words, enumerate_basis_words_capped, DEFAULT_BASIS_CAP};
pub use marginal::{density_marginal_feasible, Marginal};
pub use moment_matrix::{build_moment_matrix, feasibility_solve, LinearPin, MomentMatrix, MomentVariable};
pub use pcp::{pcp_check, ContextInput, PcpReport, PinnedMoment, SkippedPin};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::complex_value::ComplexValue;
use crate::context::ContextError;
use crate::state::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("basis has {size} words, above the cap of {cap}")]
    BasisTooLarge { size: usize, cap: usize },
    #[error("the unit word must be fixed to 1, got {0}")]
    UnitNotOne(String),
    #[error("fixed values are not Hermitian-consistent at `{0}`")]
    HermitianInconsistency(String),
    #[error("fixed word `{0}` is not in normal form")]
    NonCanonicalWord(String),
    #[error("fixed word `{word}` has degree {degree}, above {limit}")]
    DegreeTooHigh {
        word: String,
        degree: usize,
        limit: usize,
    },
    #[error("basis {index} is not unitary (deviation {deviation:.3e})")]
    NonUnitary { index: usize, deviation: f64 },
    #[error("marginal {index}: {message}")]
    InvalidProbabilities { index: usize, message: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Context(#[from] ContextError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeasibilityOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub stall_window: usize,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            tol: 1e-9,
            max_iter: 20_000,
            stall_window: 500,
        }
    }
}

/// Evidence attached to a feasible verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Moment of every canonical word that enters the matrix.
    Moments(BTreeMap<String, ComplexValue>),
    /// Density matrix, row-major.
    Density(Vec<Vec<ComplexValue>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FeasibilityVerdict {
    Feasible {
        witness: Witness,
        min_eigenvalue: f64,
        iterations: usize,
        residual: f64,
    },
    InfeasibleCertified {
        reason: String,
    },
    NumericallyInfeasible {
        residual: f64,
        iterations: usize,
    },
    Undecided {
        residual: f64,
        iterations: usize,
    },
}

impl FeasibilityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            FeasibilityVerdict::Feasible { .. } => "feasible",
            FeasibilityVerdict::InfeasibleCertified { .. } => "infeasible_certified",
            FeasibilityVerdict::NumericallyInfeasible { .. } => "numerically_infeasible",
            FeasibilityVerdict::Undecided { .. } => "undecided",
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible { .. })
    }

    /// Certified or numerical infeasibility.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            FeasibilityVerdict::InfeasibleCertified { .. } | FeasibilityVerdict::NumericallyInfeasible { .. }
        )
    }
}

fn verdict_from(outcome: engine::EngineOutcome, witness: impl FnOnce(&[f64], &nalgebra::DMatrix<num_complex::Complex64>) -> Witness) -> FeasibilityVerdict {
    use engine::EngineOutcome as E;
    match outcome {
        E::Feasible {
            x,
            matrix,
            min_eigenvalue,
            iterations,
            residual,
        } => FeasibilityVerdict::Feasible {
            witness: witness(&x, &matrix),
            min_eigenvalue,
            iterations,
            residual,
        },
        E::Infeasible(reason) => FeasibilityVerdict::InfeasibleCertified { reason },
        E::Stalled { residual, iterations } => FeasibilityVerdict::NumericallyInfeasible { residual, iterations },
        E::Exhausted { residual, iterations } => FeasibilityVerdict::Undecided { residual, iterations },
    }
}
