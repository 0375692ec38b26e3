use alloc::string::String;
use alloc::vec::Vec;

use crate::quantale::QValue;
use crate::rational::{self, Rat};
use crate::systems::Coalgebra;

use super::bisim::{kernel_classes, partition_refinement};
use super::fixpoint::{bd_fixpoint, FixpointOptions};
use super::formula::Evaluator;
use super::logic::{logical_distance, LdOptions};
use super::EngineError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdequacyViolation {
    pub formula: String,
    pub x: usize,
    pub y: usize,
    pub gap: QValue,
    pub bd: QValue,
}

#[derive(Clone, Debug)]
pub struct AdequacyReport {
    pub formulas: usize,
    pub pairs: usize,
    pub bd_steps: usize,
    pub residual: Option<Rat>,
    pub violations: Vec<AdequacyViolation>,
}

impl AdequacyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that no enumerated formula separates two states by more than
/// their behavioural distance (plus the iteration residual).
pub fn check_adequacy(
    c: &Coalgebra,
    depth: usize,
    fix: &FixpointOptions,
    ld: &LdOptions,
) -> Result<AdequacyReport, EngineError> {
    let q = c.quantale();
    let bd = bd_fixpoint(c, fix)?.matrix;
    let logic = logical_distance(c, depth, ld)?;
    let slack = bd.residual.clone().unwrap_or_else(rational::zero);
    let n = c.len();
    let mut violations = Vec::new();
    for e in &logic.basis {
        for x in 0..n {
            for y in x + 1..n {
                let gap = q.hom_s(&e.values[x], &e.values[y]);
                let d = bd.get(x, y);
                let ok = match (q.numeric(&gap), q.numeric(d)) {
                    (Some(g), Some(b)) => q.leq(d, &gap) || *g <= b + &slack,
                    _ => q.leq(d, &gap),
                };
                if !ok {
                    violations.push(AdequacyViolation { formula: e.formula.render(q), x, y, gap, bd: d.clone() });
                }
            }
        }
    }
    Ok(AdequacyReport {
        formulas: logic.basis.len(),
        pairs: n * n.saturating_sub(1) / 2,
        bd_steps: bd.steps,
        residual: bd.residual,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressivityPoint {
    pub depth: usize,
    /// Largest numeric `bd − ld` over pairs for unit-interval quantales;
    /// number of pairs where `ld ≠ bd` otherwise.
    pub gap: Rat,
}

#[derive(Clone, Debug)]
pub struct ExpressivityReport {
    pub points: Vec<ExpressivityPoint>,
    pub monotone: bool,
    pub saturated_at: Option<usize>,
    pub bd_residual: Option<Rat>,
}

/// Gap between logical and behavioural distance along a depth schedule.
pub fn check_expressivity(
    c: &Coalgebra,
    schedule: &[usize],
    fix: &FixpointOptions,
    ld: &LdOptions,
) -> Result<ExpressivityReport, EngineError> {
    let q = c.quantale();
    let bd = bd_fixpoint(c, fix)?.matrix;
    let max_depth = schedule.iter().copied().max().unwrap_or(0);
    let logic = logical_distance(c, max_depth, ld)?;
    let n = c.len();
    let mut points = Vec::new();
    for &d in schedule {
        let layer = logic.at_depth(d);
        let mut gap = rational::zero();
        for x in 0..n {
            for y in x + 1..n {
                let (l, b) = (layer.get(x, y), bd.get(x, y));
                match (q.numeric(l), q.numeric(b)) {
                    (Some(l), Some(b)) => {
                        let diff = b - l;
                        if diff > gap {
                            gap = diff;
                        }
                    }
                    _ => {
                        if l != b {
                            gap += rational::one();
                        }
                    }
                }
            }
        }
        points.push(ExpressivityPoint { depth: d, gap });
    }
    let mut order: Vec<&ExpressivityPoint> = points.iter().collect();
    order.sort_by_key(|p| p.depth);
    let monotone = order.windows(2).all(|w| w[1].gap <= w[0].gap);
    Ok(ExpressivityReport { points, monotone, saturated_at: logic.saturated_at, bd_residual: bd.residual })
}

/// How to build the quotient used for invariance checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionSource {
    /// Coarsest bisimulation (bool2 labelled transition systems).
    Bisimilarity,
    /// Points at distance `k` under the behavioural distance.
    BdKernel,
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub classes: usize,
    pub formulas_checked: usize,
    /// A pair `(x, y)` where `bd(x, y)` and `bd(gx, gy)` differ.
    pub bd_mismatch: Option<(usize, usize)>,
    /// A formula and state where `⟦φ⟧(x) ≠ ⟦φ⟧(gx)`.
    pub formula_mismatch: Option<(String, usize)>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.bd_mismatch.is_none() && self.formula_mismatch.is_none()
    }
}

/// Checks that behavioural distance and formula semantics are preserved by
/// the given coalgebra morphism `g: c → target`.
pub fn check_morphism_invariance(
    c: &Coalgebra,
    target: &Coalgebra,
    g: &[usize],
    depth: usize,
    fix: &FixpointOptions,
    ld: &LdOptions,
) -> Result<InvarianceReport, EngineError> {
    c.check_morphism(target, g)?;
    let q = c.quantale();
    let bd = bd_fixpoint(c, fix)?.matrix;
    let bd_target = bd_fixpoint(target, fix)?.matrix;
    let slack = {
        let r1 = bd.residual.clone().unwrap_or_else(rational::zero);
        let r2 = bd_target.residual.clone().unwrap_or_else(rational::zero);
        r1 + r2 + &fix.eps
    };
    let n = c.len();
    let mut bd_mismatch = None;
    'pairs: for x in 0..n {
        for y in 0..n {
            let (u, v) = (bd.get(x, y), bd_target.get(g[x], g[y]));
            let same = match (q.numeric(u), q.numeric(v)) {
                (Some(a), Some(b)) => {
                    let diff = if a > b { a - b } else { b - a };
                    diff <= slack
                }
                _ => u == v,
            };
            if !same {
                bd_mismatch = Some((x, y));
                break 'pairs;
            }
        }
    }
    let logic = logical_distance(c, depth, ld)?;
    let mut eval = Evaluator::new(target);
    let mut formula_mismatch = None;
    for e in &logic.basis {
        let image = eval.eval(&e.formula)?;
        if let Some(x) = (0..n).find(|&x| e.values[x] != image[g[x]]) {
            formula_mismatch = Some((e.formula.render(q), x));
            break;
        }
    }
    Ok(InvarianceReport {
        classes: target.len(),
        formulas_checked: logic.basis.len(),
        bd_mismatch,
        formula_mismatch,
    })
}

/// Quotient of `c` by the chosen partition, with its projection.
pub fn quotient_by(
    c: &Coalgebra,
    source: PartitionSource,
    fix: &FixpointOptions,
) -> Result<(Coalgebra, Vec<usize>), EngineError> {
    let class = match source {
        PartitionSource::Bisimilarity => partition_refinement(c)?,
        PartitionSource::BdKernel => kernel_classes(&bd_fixpoint(c, fix)?.matrix.vcat),
    };
    Ok(c.quotient(&class)?)
}
