//! Workbench for contextual quantization of probability spaces.

pub mod algebra;
pub mod complex_value;
pub mod state;
pub mod linalg;
pub mod context;
pub mod feasibility;
pub mod wigner;
pub mod jobs;
