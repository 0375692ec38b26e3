//! Behavioural and logical distances on coalgebras.

mod bisim;
mod fixpoint;
mod formula;
mod harness;
mod logic;

pub use bisim::{equivalence_matrix, kernel_classes, partition_refinement, renumber};
pub use fixpoint::{bd_fixpoint, bd_step, numeric_residual, BdRun, DistanceMatrix, FixpointOptions, Provenance};
pub use formula::{eval_formula, Evaluator, Formula, FormulaRef};
pub use harness::{
    check_adequacy, check_expressivity, check_morphism_invariance, quotient_by, AdequacyReport, AdequacyViolation, ExpressivityPoint,
    ExpressivityReport, InvarianceReport, PartitionSource,
};
pub use logic::{distinguishing_formula, logical_distance, BasisEntry, LdOptions, LdResult};

use alloc::string::String;

use crate::systems::SystemsError;
use crate::vcat::VCatError;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("formula error: {0}")]
    Formula(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Systems(#[from] SystemsError),
    #[error(transparent)]
    VCat(#[from] VCatError),
}
