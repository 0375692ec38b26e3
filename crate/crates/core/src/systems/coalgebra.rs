use alloc::vec::Vec;

use crate::quantale::Quantale;
use crate::vcat::{self, VCat, VCatReport};

use super::functor::{Functor, FunctorValue, ValueIssue};
use super::kantorovich::{lift_matrix, Backend};
use super::SystemsError;

/// A finite coalgebra `(X, a, α)`: a symmetric base structure, a functor and
/// one functor value per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalgebra {
    base: VCat,
    functor: Functor,
    transitions: Vec<FunctorValue>,
}

/// Outcome of [`Coalgebra::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoalgebraReport {
    pub base: VCatReport,
    pub values: Vec<(usize, ValueIssue)>,
    /// A pair of states where `a(x,y) ≰ F̄a(αx, αy)`.
    pub not_nonexpansive: Option<(usize, usize)>,
    /// Set when the lifted structure could not be computed.
    pub lifting_error: Option<SystemsError>,
}

impl CoalgebraReport {
    pub fn passed(&self) -> bool {
        self.base.is_symmetric_vcat() && self.values.is_empty() && self.not_nonexpansive.is_none() && self.lifting_error.is_none()
    }
}

impl Coalgebra {
    /// Assembles a coalgebra, checking sizes and the functor/quantale
    /// pairing. Use [`Coalgebra::validate`] for the semantic checks.
    pub fn new(base: VCat, functor: Functor, transitions: Vec<FunctorValue>) -> Result<Self, SystemsError> {
        functor.check_quantale(base.quantale())?;
        if transitions.len() != base.len() {
            return Err(SystemsError::Invalid(alloc::format!(
                "{} transition entries for {} states",
                transitions.len(),
                base.len()
            )));
        }
        Ok(Coalgebra { base, functor, transitions })
    }

    pub fn base(&self) -> &VCat {
        &self.base
    }

    pub fn quantale(&self) -> &Quantale {
        self.base.quantale()
    }

    pub fn functor(&self) -> &Functor {
        &self.functor
    }

    pub fn transitions(&self) -> &[FunctorValue] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn states(&self) -> &[alloc::string::String] {
        self.base.states()
    }

    /// Checks value invariants, the base axioms and nonexpansiveness of the
    /// structure map into the lifted base.
    pub fn validate(&self) -> CoalgebraReport {
        let n = self.len();
        let q = self.quantale();
        let mut report = CoalgebraReport { base: self.base.validate(), ..CoalgebraReport::default() };
        for (x, t) in self.transitions.iter().enumerate() {
            for issue in t.check(&self.functor, q, n) {
                report.values.push((x, issue));
            }
        }
        if !report.values.is_empty() || !report.base.is_vcat() {
            return report;
        }
        let values: Vec<&FunctorValue> = self.transitions.iter().collect();
        match lift_matrix(&self.functor, &self.base, &values, &Backend::Auto) {
            Ok(lifted) => {
                report.not_nonexpansive = (0..n)
                    .flat_map(|x| (0..n).map(move |y| (x, y)))
                    .find(|&(x, y)| !q.leq(self.base.get(x, y), &lifted[x][y]));
            }
            Err(e) => report.lifting_error = Some(e),
        }
        report
    }

    /// Checks `β ∘ g = F g ∘ α` for a state map `g` into `target`.
    pub fn check_morphism(&self, target: &Coalgebra, g: &[usize]) -> Result<(), SystemsError> {
        if g.len() != self.len() || g.iter().any(|&y| y >= target.len()) {
            return Err(SystemsError::Invalid("state map does not fit the carriers".into()));
        }
        for (x, t) in self.transitions.iter().enumerate() {
            let pushed = self.functor.map_value(self.quantale(), g, target.len(), t);
            if pushed != target.transitions[g[x]] {
                return Err(SystemsError::NotMorphism(x));
            }
        }
        Ok(())
    }

    /// The quotient coalgebra along a surjective class assignment, if the
    /// projection is a morphism. Class `c` is named after its first member.
    pub fn quotient(&self, class_of: &[usize]) -> Result<(Coalgebra, Vec<usize>), SystemsError> {
        let n = self.len();
        if class_of.len() != n {
            return Err(SystemsError::Invalid("class assignment length".into()));
        }
        // renumber classes by first occurrence
        let mut rename: Vec<Option<usize>> = alloc::vec![None; n.max(class_of.iter().copied().max().map_or(0, |m| m + 1))];
        let mut representatives = Vec::new();
        let projection: Vec<usize> = class_of
            .iter()
            .enumerate()
            .map(|(x, &c)| {
                *rename[c].get_or_insert_with(|| {
                    representatives.push(x);
                    representatives.len() - 1
                })
            })
            .collect();
        let k = representatives.len();
        let q = self.quantale();
        let transitions: Vec<FunctorValue> = representatives
            .iter()
            .map(|&r| self.functor.map_value(q, &projection, k, &self.transitions[r]))
            .collect();
        let mut matrix = alloc::vec![alloc::vec![q.bottom(); k]; k];
        for x in 0..n {
            for y in 0..n {
                let (cx, cy) = (projection[x], projection[y]);
                matrix[cx][cy] = q.join2(&matrix[cx][cy], self.base.get(x, y));
            }
        }
        vcat::repair_to_vcat(q, &mut matrix);
        let states = representatives.iter().map(|&r| self.base.states()[r].clone()).collect();
        let base = VCat::new(q.clone(), states, matrix)?;
        let quotient = Coalgebra { base, functor: self.functor.clone(), transitions };
        self.check_morphism(&quotient, &projection)?;
        Ok((quotient, projection))
    }
}
