use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::quantale::QuantaleKind;
use crate::systems::{Coalgebra, FunctorValue};
use crate::vcat::VCat;

use super::fixpoint::{DistanceMatrix, Provenance};
use super::EngineError;

/// Coarsest bisimulation of a two-valued labelled transition system, by
/// splitter refinement. Returns a class index per state, numbered by first
/// occurrence.
pub fn partition_refinement(c: &Coalgebra) -> Result<Vec<usize>, EngineError> {
    if c.quantale().kind() != QuantaleKind::Bool2 {
        return Err(EngineError::Precondition("partition refinement needs a bool2 system".into()));
    }
    let succ: Vec<&Vec<BTreeSet<usize>>> = c
        .transitions()
        .iter()
        .map(|t| match t {
            FunctorValue::Lts(per) => Ok(per),
            _ => Err(EngineError::Precondition("partition refinement needs an lts".into())),
        })
        .collect::<Result<_, _>>()?;
    let n = c.len();
    let labels = c.functor().labels().len();
    let mut class = alloc::vec![0usize; n];
    let mut count = usize::from(n > 0);
    loop {
        let mut changed = false;
        'splitters: for splitter in 0..count {
            for a in 0..labels {
                for block in 0..count {
                    let members: Vec<usize> = (0..n).filter(|&x| class[x] == block).collect();
                    let hits = |x: usize| succ[x][a].iter().any(|&y| class[y] == splitter);
                    let (inside, outside): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&x| hits(x));
                    if !inside.is_empty() && !outside.is_empty() {
                        for &x in &outside {
                            class[x] = count;
                        }
                        count += 1;
                        changed = true;
                        break 'splitters;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(renumber(&class))
}

/// Renames classes in order of first occurrence.
pub fn renumber(class: &[usize]) -> Vec<usize> {
    let mut map: alloc::collections::BTreeMap<usize, usize> = alloc::collections::BTreeMap::new();
    class
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// The equivalence as a two-valued distance matrix.
pub fn equivalence_matrix(c: &Coalgebra, class: &[usize]) -> DistanceMatrix {
    let q = c.quantale();
    let vcat = VCat::from_fn(q.clone(), c.states().to_vec(), |x, y| if class[x] == class[y] { q.top() } else { q.bottom() });
    DistanceMatrix { vcat, provenance: Provenance::Bisim, steps: 0, residual: None, converged: true }
}

/// Classes of points at distance `k` or better.
pub fn kernel_classes(d: &VCat) -> Vec<usize> {
    let order = d.natural_order();
    let n = d.len();
    let mut class = alloc::vec![usize::MAX; n];
    let mut next = 0;
    for x in 0..n {
        if class[x] == usize::MAX {
            for y in x..n {
                if class[y] == usize::MAX && order[x][y] && order[y][x] {
                    class[y] = next;
                }
            }
            next += 1;
        }
    }
    class
}
