//! Finitely presented *-algebras: presentations, polynomials, the adjoint and
//! normal-form rewriting.

mod dsl;
mod poly;
mod presentation;
mod rewrite;
mod word;

pub use dsl::{parse_complex_literal, parse_expression, parse_presentation};
pub use poly::{Polynomial, SpaceId};
pub use presentation::{
    format_complex, ClassTag, GeneratorSymbol, Presentation, Rule, DEFAULT_STEP_BUDGET,
};
pub use rewrite::{normal_form, normal_form_with, RewriteStrategy, PRUNE_THRESHOLD};
pub use word::{GenId, Word};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("gram matrix is not Hermitian at ({row}, {col})")]
    NonHermitianGram { row: usize, col: usize },
    #[error("unknown class tag `{0}`")]
    UnknownClass(String),
    #[error("unknown symbol `{symbol}` at line {line}, column {column}")]
    UnknownSymbol {
        symbol: String,
        line: usize,
        column: usize,
    },
    #[error("malformed scalar `{text}` at line {line}, column {column}")]
    MalformedScalar {
        text: String,
        line: usize,
        column: usize,
    },
    #[error("polynomials belong to different presentations")]
    MismatchedPresentations,
    #[error("rewriting did not terminate within {steps} steps; last intermediates: {}", last.join(" | "))]
    NonTermination { steps: usize, last: Vec<String> },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
}

/// Parses `text` over `pres` and reduces it to normal form.
pub fn reduce_text(text: &str, pres: &Presentation) -> Result<Polynomial, AlgebraError> {
    normal_form(&parse_expression(text, pres)?, pres)
}
