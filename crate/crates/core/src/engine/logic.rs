use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::quantale::{QValue, Quantale};
use crate::rational::{self, Rat};
use crate::systems::{lifted_witness, Backend, Coalgebra, Modality};
use crate::vcat::VCat;

use super::fixpoint::{DistanceMatrix, Provenance};
use super::formula::{Formula, FormulaRef};
use super::EngineError;

#[derive(Clone, Debug)]
pub struct LdOptions {
    /// Cap on the number of formulas added by propositional closure.
    pub width: usize,
    /// Constant grid for unit-interval quantales.
    pub grid: Rat,
    /// Backend used to find optimal predicates for synthesized formulas.
    pub backend: Backend,
    /// Add, at every layer, formulas built from optimal lifted predicates.
    pub synthesize: bool,
}

impl Default for LdOptions {
    fn default() -> Self {
        LdOptions { width: 256, grid: rational::rat(1, 8), backend: Backend::Auto, synthesize: true }
    }
}

#[derive(Clone, Debug)]
pub struct BasisEntry {
    pub formula: FormulaRef,
    pub values: Vec<QValue>,
    pub depth: usize,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct LdResult {
    pub matrix: DistanceMatrix,
    pub basis: Vec<BasisEntry>,
    /// Logical distance over formulas of depth `<= d`, for `d = 0, 1, ...`
    /// up to the last computed layer.
    pub layers: Vec<VCat>,
    /// Depth at which the basis stopped changing the distance, if reached.
    pub saturated_at: Option<usize>,
}

impl LdResult {
    /// Distance over formulas of depth `<= depth`; beyond saturation this is
    /// the saturated distance.
    pub fn at_depth(&self, depth: usize) -> &VCat {
        &self.layers[depth.min(self.layers.len() - 1)]
    }
}

/// Formulas keyed by their denotation, with the induced initial structure
/// maintained incrementally.
struct Basis<'c> {
    c: &'c Coalgebra,
    entries: Vec<BasisEntry>,
    index: BTreeMap<Vec<QValue>, usize>,
    structure: Vec<Vec<QValue>>,
}

impl<'c> Basis<'c> {
    fn new(c: &'c Coalgebra) -> Self {
        let n = c.len();
        let top = c.quantale().top();
        Basis { c, entries: Vec::new(), index: BTreeMap::new(), structure: alloc::vec![alloc::vec![top; n]; n] }
    }

    fn q(&self) -> &Quantale {
        self.c.quantale()
    }

    /// Adds a formula; returns `true` when its denotation is new. A known
    /// denotation keeps the smaller formula.
    fn insert(&mut self, formula: FormulaRef, values: Vec<QValue>) -> bool {
        let depth = formula.depth();
        let size = formula.size();
        if let Some(&i) = self.index.get(&values) {
            let e = &mut self.entries[i];
            if (size, depth) < (e.size, e.depth) {
                e.formula = formula;
                e.size = size;
                e.depth = depth;
            }
            return false;
        }
        let q = self.c.quantale();
        let n = values.len();
        for x in 0..n {
            for y in 0..n {
                let gap = q.hom_s(&values[x], &values[y]);
                self.structure[x][y] = q.meet2(&self.structure[x][y], &gap);
            }
        }
        self.index.insert(values.clone(), self.entries.len());
        self.entries.push(BasisEntry { formula, values, depth, size });
        true
    }

    fn vcat(&self) -> VCat {
        VCat::new(self.q().clone(), self.c.states().to_vec(), self.structure.clone()).expect("basis structure has carrier shape")
    }

    /// Semi-naive propositional closure of the entries from `first_new` on,
    /// stopping once `cap` entries exist.
    fn close(&mut self, first_new: usize, constants: &[QValue], cap: usize) {
        let q = self.q().clone();
        let mut frontier_start = first_new;
        while frontier_start < self.entries.len() && self.entries.len() < cap {
            let frontier_end = self.entries.len();
            for i in frontier_start..frontier_end {
                let (fi, vi) = (self.entries[i].formula.clone(), self.entries[i].values.clone());
                for u in constants {
                    let vt: Vec<QValue> = vi.iter().map(|v| q.tensor(u, v)).collect();
                    self.insert(Formula::tensor(u.clone(), fi.clone()), vt);
                    let vh: Vec<QValue> = vi.iter().map(|v| q.hom_s(u, v)).collect();
                    self.insert(Formula::hom_s(u.clone(), fi.clone()), vh);
                    if self.entries.len() >= cap {
                        return;
                    }
                }
                for j in 0..frontier_end {
                    if j >= frontier_start && j > i {
                        continue;
                    }
                    let (fj, vj) = (self.entries[j].formula.clone(), self.entries[j].values.clone());
                    let va: Vec<QValue> = vi.iter().zip(&vj).map(|(a, b)| q.meet2(a, b)).collect();
                    self.insert(Formula::and(fi.clone(), fj.clone()), va);
                    let vo: Vec<QValue> = vi.iter().zip(&vj).map(|(a, b)| q.join2(a, b)).collect();
                    self.insert(Formula::or(fi.clone(), fj), vo);
                    if self.entries.len() >= cap {
                        return;
                    }
                }
            }
            frontier_start = frontier_end;
        }
    }

    /// A formula denoting `f`, built as `⋁_x f(x) ⊗ ⋀_{ψ∈S_x} hom_s(ψ(x), ψ)`
    /// over basis formulas `ψ`, where each `S_x` is chosen so that the meet
    /// equals the current structure row of `x`. Requires `f` nonexpansive
    /// for that structure.
    fn represent(&self, f: &[QValue]) -> Result<FormulaRef, EngineError> {
        if let Some(&i) = self.index.get(f) {
            return Ok(self.entries[i].formula.clone());
        }
        let q = self.q();
        let n = f.len();
        let bottom = q.bottom();
        let k = q.unit();
        let mut terms: Vec<FormulaRef> = Vec::new();
        let mut denotation: Vec<QValue> = alloc::vec![bottom.clone(); n];
        for x in 0..n {
            if f[x] == bottom {
                continue;
            }
            let target = &self.structure[x];
            let mut acc: Vec<QValue> = alloc::vec![q.top(); n];
            let mut parts: Vec<FormulaRef> = Vec::new();
            for e in &self.entries {
                if acc == *target {
                    break;
                }
                let gaps: Vec<QValue> = (0..n).map(|y| q.hom_s(&e.values[x], &e.values[y])).collect();
                let next: Vec<QValue> = acc.iter().zip(&gaps).map(|(a, g)| q.meet2(a, g)).collect();
                if next != acc {
                    acc = next;
                    parts.push(Formula::hom_s(e.values[x].clone(), e.formula.clone()));
                }
            }
            for y in 0..n {
                denotation[y] = q.join2(&denotation[y], &q.tensor(&f[x], &acc[y]));
            }
            let mut inner = match parts.pop() {
                None => Formula::top(),
                Some(first) => parts.into_iter().rev().fold(first, |accf, p| Formula::and(p, accf)),
            };
            if f[x] != k || matches!(*inner, Formula::Top) {
                inner = Formula::tensor(f[x].clone(), inner);
            }
            terms.push(inner);
        }
        if denotation != f {
            return Err(EngineError::Precondition("predicate is not nonexpansive for the current logical distance".into()));
        }
        Ok(match terms.pop() {
            None => Formula::tensor(bottom, Formula::top()),
            Some(first) => terms.into_iter().rev().fold(first, |acc, t| Formula::or(t, acc)),
        })
    }
}

fn apply_modal(c: &Coalgebra, m: &Modality, inner: &[QValue]) -> Result<Vec<QValue>, EngineError> {
    let q = c.quantale();
    Ok(c.transitions().iter().map(|t| c.functor().apply(q, m, inner, t)).collect::<Result<Vec<_>, _>>()?)
}

/// Logical distance over formulas up to the given modal depth, with
/// semantic deduplication and width-capped propositional closure.
pub fn logical_distance(c: &Coalgebra, depth: usize, options: &LdOptions) -> Result<LdResult, EngineError> {
    if !rational::divides_one(&options.grid) {
        return Err(EngineError::Precondition("grid step must divide 1".into()));
    }
    let q = c.quantale();
    let n = c.len();
    let constants = q.elements().unwrap_or_else(|| q.elements_or_grid(&options.grid));
    let modalities = c.functor().modalities();
    let mut basis = Basis::new(c);
    basis.insert(Formula::top(), alloc::vec![q.top(); n]);
    basis.close(0, &constants, options.width.max(1));
    let mut layers = alloc::vec![basis.vcat()];
    let mut saturated_at = None;
    for d in 1..=depth {
        let layer_start = basis.entries.len();
        let snapshot: Vec<(FormulaRef, Vec<QValue>)> =
            basis.entries.iter().map(|e| (e.formula.clone(), e.values.clone())).collect();
        for m in &modalities {
            if m.is_nullary() {
                let values = apply_modal(c, m, &alloc::vec![q.top(); n])?;
                basis.insert(Formula::modal(m.clone(), Formula::top()), values);
                continue;
            }
            for (f, v) in &snapshot {
                let values = apply_modal(c, m, v)?;
                basis.insert(Formula::modal(m.clone(), f.clone()), values);
            }
        }
        if options.synthesize {
            let previous = layers.last().expect("layer 0 exists").clone();
            let mut seen: BTreeMap<(Modality, Vec<QValue>), ()> = BTreeMap::new();
            let mut synthesized = Vec::new();
            for x in 0..n {
                for y in x + 1..n {
                    let lifted = lifted_witness(c.functor(), &previous, &c.transitions()[x], &c.transitions()[y], &options.backend)?;
                    if lifted.value == q.top() {
                        continue;
                    }
                    for w in lifted.witnesses {
                        if seen.insert((w.modality.clone(), w.predicate.clone()), ()).is_none() {
                            synthesized.push(w);
                        }
                    }
                }
            }
            // represent against the previous layer only, so that depths stay bounded
            let mut previous_basis = Basis::new(c);
            for (f, v) in snapshot {
                previous_basis.insert(f, v);
            }
            for w in synthesized {
                let inner = previous_basis.represent(&w.predicate)?;
                let values = apply_modal(c, &w.modality, &w.predicate)?;
                basis.insert(Formula::modal(w.modality, inner), values);
            }
        }
        let cap = options.width.max(basis.entries.len());
        basis.close(layer_start, &constants, cap);
        let current = basis.vcat();
        let unchanged = if options.synthesize {
            current == *layers.last().expect("layer exists")
        } else {
            basis.entries.len() == layer_start
        };
        layers.push(current);
        if unchanged {
            saturated_at = Some(d - 1);
            break;
        }
    }
    let reached = layers.len() - 1;
    let matrix = DistanceMatrix {
        vcat: layers[reached].clone(),
        provenance: Provenance::Ld { depth: reached },
        steps: reached,
        residual: None,
        converged: saturated_at.is_some(),
    };
    Ok(LdResult { matrix, basis: basis.entries, layers, saturated_at })
}

/// Best distinguishing formula for `x` and `y` among formulas of modal
/// depth `<= budget`: the largest gap, then the smallest size, then the
/// smallest depth.
pub fn distinguishing_formula(
    c: &Coalgebra,
    x: usize,
    y: usize,
    budget: usize,
    options: &LdOptions,
) -> Result<(FormulaRef, QValue), EngineError> {
    if x >= c.len() || y >= c.len() {
        return Err(EngineError::Precondition("state index out of range".into()));
    }
    let q = c.quantale();
    if budget == 0 {
        let top = q.top();
        return Ok((Formula::top(), q.hom_s(&top, &top)));
    }
    let ld = logical_distance(c, budget, options)?;
    let mut best: Option<(&BasisEntry, QValue)> = None;
    for e in &ld.basis {
        let gap = q.hom_s(&e.values[x], &e.values[y]);
        let better = match &best {
            None => true,
            Some((b, g)) => {
                if gap == *g {
                    (e.size, e.depth) < (b.size, b.depth)
                } else {
                    q.leq(&gap, g)
                }
            }
        };
        if better {
            best = Some((e, gap));
        }
    }
    let (entry, gap) = best.expect("basis contains top");
    Ok((entry.formula.clone(), gap))
}
