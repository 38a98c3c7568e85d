//! Model checking: a direct semantic evaluator used as the oracle, and the
//! labeling algorithm over normalized diamond terms.

mod labeling;
mod naive;

use thiserror::Error;

use crate::model::ModelError;
use crate::term::TermError;

pub use labeling::{check_labeling, CompiledFormula, Labeling, ProbeStats};
pub use naive::{check_naive, holds_naive};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Term(#[from] TermError),
}
