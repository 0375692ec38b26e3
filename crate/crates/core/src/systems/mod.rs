//! System types: functors, predicate liftings, coalgebras and the
//! Kantorovich lifting of distances to functor values.

mod coalgebra;
mod functor;
mod kantorovich;
mod lifting;

use alloc::string::String;

pub use coalgebra::{Coalgebra, CoalgebraReport};
pub use functor::{Distribution, Functor, FunctorValue, ValueIssue};
pub use kantorovich::{
    expectation_witness, kantorovich_lp, lift_matrix, lifted_distance, lifted_witness, weight_witness, Backend, Lifted,
    Witness,
};
pub use lifting::{ContinuityClass, Modality};

use crate::lp::LpError;
use crate::quantale::QuantaleError;
use crate::vcat::VCatError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemsError {
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown modality: {0}")]
    UnknownModality(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("state {0} has {1} successors in a system of {2} states")]
    Shape(usize, usize, usize),
    #[error("map is not a coalgebra morphism at state {0}")]
    NotMorphism(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    VCat(#[from] VCatError),
}
