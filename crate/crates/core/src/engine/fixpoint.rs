use alloc::vec::Vec;

use crate::quantale::QValue;
use crate::rational::{self, Rat};
use crate::systems::{lift_matrix, Backend, Coalgebra, FunctorValue};
use crate::vcat::VCat;

use super::EngineError;

/// Where a distance matrix came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Bd,
    Ld { depth: usize },
    Bisim,
}

/// A symmetric distance on the states of a coalgebra plus iteration data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    pub vcat: VCat,
    pub provenance: Provenance,
    /// Number of iteration steps (layers for logical distances).
    pub steps: usize,
    /// Largest numeric change in the last step; `None` for finite quantales.
    pub residual: Option<Rat>,
    pub converged: bool,
}

impl DistanceMatrix {
    pub fn get(&self, x: usize, y: usize) -> &QValue {
        self.vcat.get(x, y)
    }
}

#[derive(Clone, Debug)]
pub struct FixpointOptions {
    pub backend: Backend,
    /// Numeric residual at which unit-interval iteration stops.
    pub eps: Rat,
    pub max_iter: usize,
    /// Keep every iterate in [`BdRun::iterates`].
    pub record_iterates: bool,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        FixpointOptions { backend: Backend::Auto, eps: rational::rat(1, 1_000_000_000), max_iter: 1000, record_iterates: false }
    }
}

#[derive(Clone, Debug)]
pub struct BdRun {
    pub matrix: DistanceMatrix,
    /// `b_0, b_1, ...` when requested; `b_0` is indiscrete.
    pub iterates: Vec<VCat>,
}

/// One application of the lifting: `b'(x,y) = F̄b(αx, αy)`.
pub fn bd_step(c: &Coalgebra, b: &VCat, backend: &Backend) -> Result<VCat, EngineError> {
    let values: Vec<&FunctorValue> = c.transitions().iter().collect();
    let lifted = lift_matrix(c.functor(), b, &values, backend)?;
    Ok(VCat::new(c.quantale().clone(), c.states().to_vec(), lifted)?)
}

/// Largest numeric `hom_s` between corresponding entries.
pub fn numeric_residual(a: &VCat, b: &VCat) -> Option<Rat> {
    let q = a.quantale();
    if !q.is_unit_interval() {
        return None;
    }
    let mut worst = rational::zero();
    for (ra, rb) in a.matrix().iter().zip(b.matrix()) {
        for (u, v) in ra.iter().zip(rb) {
            let d = q.numeric(&q.hom_s(u, v)).cloned().unwrap_or_else(rational::zero);
            if d > worst {
                worst = d;
            }
        }
    }
    Some(worst)
}

/// Behavioural distance by Kleene iteration from the indiscrete structure.
pub fn bd_fixpoint(c: &Coalgebra, options: &FixpointOptions) -> Result<BdRun, EngineError> {
    let q = c.quantale();
    let mut current = VCat::indiscrete(q.clone(), c.states().to_vec());
    let mut iterates = Vec::new();
    if options.record_iterates {
        iterates.push(current.clone());
    }
    let mut steps = 0;
    let mut residual = None;
    let mut converged = false;
    while steps < options.max_iter {
        let next = bd_step(c, &current, &options.backend)?;
        steps += 1;
        let exact = next == current;
        residual = numeric_residual(&current, &next);
        if options.record_iterates {
            iterates.push(next.clone());
        }
        current = next;
        if exact || residual.as_ref().is_some_and(|r| *r <= options.eps) {
            converged = true;
            break;
        }
    }
    Ok(BdRun {
        matrix: DistanceMatrix { vcat: current, provenance: Provenance::Bd, steps, residual, converged },
        iterates,
    })
}
