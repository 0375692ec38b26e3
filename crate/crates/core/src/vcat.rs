//! Finite V-categories: quantale-valued structure matrices on named carriers.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::quantale::{QValue, Quantale, QuantaleError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VCatError {
    #[error("structure matrix shape does not match the {0} carrier states")]
    Shape(usize),
    #[error("quantale mismatch: {0}")]
    QuantaleMismatch(String),
    #[error("value at ({0}, {1}) is not in the carrier of the quantale")]
    ForeignValue(usize, usize),
    #[error("map does not land in the target carrier")]
    BadMap,
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
}

/// A finite V-category `(X, a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VCat {
    quantale: Quantale,
    states: Vec<String>,
    matrix: Vec<Vec<QValue>>,
}

/// Outcome of [`VCat::validate`]. Each field holds the first violating
/// index tuple, if any.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VCatReport {
    pub reflexivity: Option<usize>,
    pub transitivity: Option<(usize, usize, usize)>,
    pub symmetry: Option<(usize, usize)>,
}

impl VCatReport {
    /// Reflexive and transitive.
    pub fn is_vcat(&self) -> bool {
        self.reflexivity.is_none() && self.transitivity.is_none()
    }

    pub fn is_symmetric_vcat(&self) -> bool {
        self.is_vcat() && self.symmetry.is_none()
    }
}

impl VCat {
    /// Builds a V-category after checking shape and carrier membership. The
    /// axioms are not checked; see [`VCat::validate`].
    pub fn new(quantale: Quantale, states: Vec<String>, matrix: Vec<Vec<QValue>>) -> Result<Self, VCatError> {
        let n = states.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(VCatError::Shape(n));
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !quantale.contains(v) {
                    return Err(VCatError::ForeignValue(i, j));
                }
            }
        }
        Ok(VCat { quantale, states, matrix })
    }

    /// Diagonal `top`, bottom elsewhere.
    pub fn discrete(quantale: Quantale, states: Vec<String>) -> Self {
        let n = states.len();
        let (top, bottom) = (quantale.top(), quantale.bottom());
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { top.clone() } else { bottom.clone() }).collect()).collect();
        VCat { quantale, states, matrix }
    }

    /// Every entry `top`.
    pub fn indiscrete(quantale: Quantale, states: Vec<String>) -> Self {
        let n = states.len();
        let top = quantale.top();
        VCat { matrix: alloc::vec![alloc::vec![top; n]; n], quantale, states }
    }

    /// Builds a structure from an entry function.
    pub fn from_fn(quantale: Quantale, states: Vec<String>, mut entry: impl FnMut(usize, usize) -> QValue) -> Self {
        let n = states.len();
        let matrix = (0..n).map(|i| (0..n).map(|j| entry(i, j)).collect()).collect();
        VCat { quantale, states, matrix }
    }

    /// States named `s0, s1, ...`.
    pub fn numbered_states(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("s{i}")).collect()
    }

    pub fn quantale(&self) -> &Quantale {
        &self.quantale
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn matrix(&self) -> &[Vec<QValue>] {
        &self.matrix
    }

    pub fn get(&self, x: usize, y: usize) -> &QValue {
        &self.matrix[x][y]
    }

    pub fn set(&mut self, x: usize, y: usize, value: QValue) {
        self.matrix[x][y] = value;
    }

    pub fn index_of(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn validate(&self) -> VCatReport {
        let q = &self.quantale;
        let n = self.len();
        let k = q.unit();
        let mut report = VCatReport {
            reflexivity: (0..n).find(|&x| !q.leq(&k, &self.matrix[x][x])),
            ..VCatReport::default()
        };
        'outer: for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !q.leq(&q.tensor(&self.matrix[x][y], &self.matrix[y][z]), &self.matrix[x][z]) {
                        report.transitivity = Some((x, y, z));
                        break 'outer;
                    }
                }
            }
        }
        report.symmetry = (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .find(|&(x, y)| self.matrix[x][y] != self.matrix[y][x]);
        report
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|x| (x + 1..self.len()).all(|y| self.matrix[x][y] == self.matrix[y][x]))
    }

    /// `a_s(x,y) = a(x,y) ∧ a(y,x)`.
    pub fn symmetrize(&self) -> VCat {
        let q = &self.quantale;
        VCat::from_fn(q.clone(), self.states.clone(), |x, y| q.meet2(&self.matrix[x][y], &self.matrix[y][x]))
    }

    /// Natural preorder `{(x,y) | k <= a(x,y)}` as a boolean matrix.
    pub fn natural_order(&self) -> Vec<Vec<bool>> {
        let k = self.quantale.unit();
        self.matrix.iter().map(|row| row.iter().map(|v| self.quantale.leq(&k, v)).collect()).collect()
    }

    /// Merges points equivalent under the natural order. Returns the
    /// quotient and the projection (state index to class index). Classes
    /// are numbered by first occurrence and named after their first member.
    pub fn separated_quotient(&self) -> (VCat, Vec<usize>) {
        let order = self.natural_order();
        let n = self.len();
        let mut projection = alloc::vec![usize::MAX; n];
        let mut representatives: Vec<usize> = Vec::new();
        for x in 0..n {
            if let Some(class) = representatives.iter().position(|&r| order[x][r] && order[r][x]) {
                projection[x] = class;
            } else {
                projection[x] = representatives.len();
                representatives.push(x);
            }
        }
        let states = representatives.iter().map(|&r| self.states[r].clone()).collect();
        let quotient = VCat::from_fn(self.quantale.clone(), states, |i, j| {
            self.matrix[representatives[i]][representatives[j]].clone()
        });
        (quotient, projection)
    }

    /// Applies `f` to every state and checks `a(x,y) <= b(f x, f y)`.
    pub fn is_nonexpansive_map(&self, target: &VCat, map: &[usize]) -> bool {
        let q = &self.quantale;
        (0..self.len()).all(|x| (0..self.len()).all(|y| q.leq(&self.matrix[x][y], &target.matrix[map[x]][map[y]])))
    }

    /// `x` ranges over the carrier, `A` over a subset; returns
    /// `{x | k <= ⋁_{y∈A} a(x,y) ⊗ a(y,x)}` as a sorted index set.
    pub fn l_closure(&self, subset: &BTreeSet<usize>) -> BTreeSet<usize> {
        let q = &self.quantale;
        let k = q.unit();
        (0..self.len())
            .filter(|&x| {
                let reach: Vec<QValue> = subset.iter().map(|&y| q.tensor(&self.matrix[x][y], &self.matrix[y][x])).collect();
                q.leq(&k, &q.join(reach.iter()))
            })
            .collect()
    }

    /// `a(x,y) <= hom_s(f x, f y)` for all `x, y`.
    pub fn is_nonexpansive(&self, predicate: &[QValue]) -> bool {
        self.nonexpansiveness_violation(predicate).is_none()
    }

    pub fn nonexpansiveness_violation(&self, predicate: &[QValue]) -> Option<(usize, usize)> {
        let q = &self.quantale;
        let n = self.len();
        (0..n)
            .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
            .find(|&(x, y)| {
                let bound = q.hom_s(&predicate[x], &predicate[y]);
                !q.leq(&self.matrix[x][y], &bound) || !q.leq(&self.matrix[y][x], &bound)
            })
    }

    /// States in breadth-first order over the "not bottom" relation, so that
    /// each state tends to be constrained by already placed neighbours.
    pub fn bfs_order(&self) -> Vec<usize> {
        let n = self.len();
        let bottom = self.quantale.bottom();
        let mut seen = alloc::vec![false; n];
        let mut order = Vec::with_capacity(n);
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut head = order.len();
            order.push(start);
            while head < order.len() {
                let x = order[head];
                head += 1;
                for y in 0..n {
                    if !seen[y] && (self.matrix[x][y] != bottom || self.matrix[y][x] != bottom) {
                        seen[y] = true;
                        order.push(y);
                    }
                }
            }
        }
        order
    }

    /// Every map from the carrier into `values` that is nonexpansive into
    /// `V_s`, found by depth-first search with pruning.
    pub fn nonexpansive_maps(&self, values: &[QValue]) -> Vec<Vec<QValue>> {
        let mut out = Vec::new();
        self.for_each_nonexpansive_map(values, |f| {
            out.push(f.to_vec());
            true
        });
        out
    }

    /// Visits nonexpansive maps into `values` until `visit` returns `false`.
    pub fn for_each_nonexpansive_map(&self, values: &[QValue], mut visit: impl FnMut(&[QValue]) -> bool) {
        let order = self.bfs_order();
        let n = self.len();
        if n == 0 {
            visit(&[]);
            return;
        }
        let q = &self.quantale;
        let mut current: Vec<QValue> = alloc::vec![q.top(); n];
        let mut choice = alloc::vec![0usize; n];
        let mut depth = 0usize;
        // iterative DFS: choice[depth] is the next value index to try at order[depth]
        loop {
            if choice[depth] == values.len() {
                if depth == 0 {
                    return;
                }
                choice[depth] = 0;
                depth -= 1;
                continue;
            }
            let x = order[depth];
            let candidate = &values[choice[depth]];
            choice[depth] += 1;
            let fits = order[..depth].iter().all(|&y| {
                let bound = q.hom_s(candidate, &current[y]);
                q.leq(&self.matrix[x][y], &bound) && q.leq(&self.matrix[y][x], &bound)
            });
            if !fits {
                continue;
            }
            current[x] = candidate.clone();
            if depth + 1 == n {
                if !visit(&current) {
                    return;
                }
            } else {
                depth += 1;
            }
        }
    }

    /// Pointwise meet of two structures on the same carrier.
    pub fn meet(&self, other: &VCat) -> VCat {
        let q = &self.quantale;
        VCat::from_fn(q.clone(), self.states.clone(), |x, y| q.meet2(&self.matrix[x][y], &other.matrix[x][y]))
    }

    /// `true` when `self <= other` pointwise in the quantale order.
    pub fn below(&self, other: &VCat) -> bool {
        let q = &self.quantale;
        self.matrix.iter().zip(&other.matrix).all(|(r, s)| r.iter().zip(s).all(|(a, b)| q.leq(a, b)))
    }
}

/// One leg of a cone: a map from the carrier into the states of `target`.
#[derive(Clone, Debug)]
pub struct ConeLeg<'a> {
    pub map: Vec<usize>,
    pub target: &'a VCat,
}

/// `a(x,y) = ⋀_i a_i(f_i x, f_i y)`; the empty cone gives the indiscrete
/// structure.
pub fn initial_structure(quantale: &Quantale, states: Vec<String>, cone: &[ConeLeg<'_>]) -> Result<VCat, VCatError> {
    let n = states.len();
    for leg in cone {
        if leg.target.quantale != *quantale {
            return Err(VCatError::QuantaleMismatch(alloc::format!("{:?} vs {:?}", leg.target.quantale, quantale)));
        }
        if leg.map.len() != n || leg.map.iter().any(|&i| i >= leg.target.len()) {
            return Err(VCatError::BadMap);
        }
    }
    Ok(VCat::from_fn(quantale.clone(), states, |x, y| {
        let pulled: Vec<&QValue> = cone.iter().map(|leg| leg.target.get(leg.map[x], leg.map[y])).collect();
        quantale.meet(pulled)
    }))
}

/// Initial structure of a family of predicates viewed as maps into `V_s`:
/// `a(x,y) = ⋀_f hom_s(f x, f y)`.
pub fn initial_from_predicates<'a>(
    quantale: &Quantale,
    states: Vec<String>,
    predicates: impl IntoIterator<Item = &'a [QValue]>,
) -> VCat {
    let n = states.len();
    let mut matrix = alloc::vec![alloc::vec![quantale.top(); n]; n];
    for f in predicates {
        for x in 0..n {
            for y in 0..n {
                matrix[x][y] = quantale.meet2(&matrix[x][y], &quantale.hom_s(&f[x], &f[y]));
            }
        }
    }
    VCat { quantale: quantale.clone(), states, matrix }
}

/// `[h,l] = ⋀_s hom(h s, l s)`, the structure of the power `V^S`.
pub fn power_hom(q: &Quantale, h: &[QValue], l: &[QValue]) -> QValue {
    h.iter().zip(l).fold(q.top(), |acc, (a, b)| q.meet2(&acc, &q.hom(a, b)))
}

/// `⋀_s hom_s(h s, l s)`, the structure of the power `V_s^S`.
pub fn power_hom_s(q: &Quantale, h: &[QValue], l: &[QValue]) -> QValue {
    h.iter().zip(l).fold(q.top(), |acc, (a, b)| q.meet2(&acc, &q.hom_s(a, b)))
}

/// Tensor-transitive closure with reflexivity repair:
/// `a(x,x) ∨= k` and `a(x,z) ∨= a(x,y) ⊗ a(y,z)` to a fixpoint.
pub fn repair_to_vcat(q: &Quantale, matrix: &mut [Vec<QValue>]) {
    let n = matrix.len();
    let k = q.unit();
    for (x, row) in matrix.iter_mut().enumerate() {
        row[x] = q.join2(&row[x], &k);
    }
    loop {
        let mut changed = false;
        for y in 0..n {
            for x in 0..n {
                for z in 0..n {
                    let through = q.tensor(&matrix[x][y], &matrix[y][z]);
                    let joined = q.join2(&matrix[x][z], &through);
                    if joined != matrix[x][z] {
                        matrix[x][z] = joined;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(n: i64, d: i64) -> QValue {
        QValue::ratio(n, d)
    }

    fn states(n: usize) -> Vec<String> {
        VCat::numbered_states(n)
    }

    #[test]
    fn validation() {
        let l = Quantale::luk01();
        assert!(VCat::discrete(l.clone(), states(3)).validate().is_symmetric_vcat());
        let bad = VCat::new(
            l.clone(),
            states(3),
            vec![
                vec![r(0, 1), r(3, 10), r(9, 10)],
                vec![r(3, 10), r(0, 1), r(3, 10)],
                vec![r(9, 10), r(3, 10), r(0, 1)],
            ],
        )
        .unwrap();
        let report = bad.validate();
        assert!(report.reflexivity.is_none());
        let (x, y, z) = report.transitivity.unwrap();
        assert!(!l.leq(&l.tensor(bad.get(x, y), bad.get(y, z)), bad.get(x, z)));
        let one = VCat::new(l.clone(), states(1), vec![vec![l.unit()]]).unwrap();
        assert!(one.validate().is_vcat());
        assert!(matches!(VCat::new(l, states(2), vec![vec![r(0, 1)]]), Err(VCatError::Shape(2))));
    }

    #[test]
    fn symmetrization() {
        let l = Quantale::luk01();
        let x = VCat::new(l.clone(), states(2), vec![vec![r(0, 1), r(1, 5)], vec![r(7, 10), r(0, 1)]]).unwrap();
        let s = x.symmetrize();
        assert_eq!(s.get(0, 1), &r(7, 10));
        assert_eq!(s.symmetrize(), s);
        let b = Quantale::bool2();
        let pre = VCat::new(b.clone(), states(2), vec![vec![b.top(), b.top()], vec![b.bottom(), b.top()]]).unwrap();
        assert_eq!(pre.symmetrize().get(0, 1), &b.bottom());
    }

    #[test]
    fn quotients() {
        let l = Quantale::luk01();
        let x = VCat::new(l.clone(), states(2), vec![vec![r(0, 1), r(0, 1)], vec![r(0, 1), r(0, 1)]]).unwrap();
        let (q, p) = x.separated_quotient();
        assert_eq!(q.len(), 1);
        assert_eq!(p, vec![0, 0]);
        let d = VCat::discrete(l, states(3));
        let (q, p) = d.separated_quotient();
        assert_eq!(q, d);
        assert_eq!(p, vec![0, 1, 2]);
        let b = Quantale::bool2();
        let (q, _) = VCat::indiscrete(b, states(3)).separated_quotient();
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn initial_structures() {
        let l = Quantale::luk01();
        let base = VCat::new(l.clone(), states(2), vec![vec![r(0, 1), r(1, 3)], vec![r(1, 3), r(0, 1)]]).unwrap();
        let id = initial_structure(&l, states(2), &[ConeLeg { map: vec![0, 1], target: &base }]).unwrap();
        assert_eq!(id, base);
        let empty = initial_structure(&l, states(2), &[]).unwrap();
        assert_eq!(empty, VCat::indiscrete(l.clone(), states(2)));
        let f = [r(1, 10), r(1, 2)];
        let g = [r(3, 10), r(2, 5)];
        let init = initial_from_predicates(&l, states(2), [&f[..], &g[..]]);
        assert_eq!(init.get(0, 1), &r(2, 5));
    }

    #[test]
    fn nonexpansive_cone_recovers_structure() {
        // all grid predicates nonexpansive for a 2-point metric space
        let l = Quantale::luk01();
        let base = VCat::new(l.clone(), states(2), vec![vec![r(0, 1), r(3, 8)], vec![r(3, 8), r(0, 1)]]).unwrap();
        let grid = l.elements_or_grid(&crate::rational::rat(1, 8));
        let mut preds = Vec::new();
        for a in &grid {
            for b in &grid {
                let f = vec![a.clone(), b.clone()];
                if base.is_nonexpansive(&f) {
                    preds.push(f);
                }
            }
        }
        let init = initial_from_predicates(&l, states(2), preds.iter().map(Vec::as_slice));
        assert_eq!(init, base);
    }

    #[test]
    fn powers() {
        let l = Quantale::luk01();
        assert_eq!(power_hom_s(&l, &[r(1, 10), r(1, 2)], &[r(2, 5), r(1, 2)]), r(3, 10));
        let b = Quantale::bool2();
        let (t, f) = (b.top(), b.bottom());
        assert_eq!(power_hom(&b, &[f.clone(), t.clone()], &[t.clone(), t.clone()]), t);
        assert_eq!(power_hom(&b, &[t.clone(), t.clone()], &[f, t.clone()]), b.bottom());
        assert!(l.leq(&l.unit(), &power_hom(&l, &[r(1, 3)], &[r(1, 3)])));
    }

    #[test]
    fn l_closures() {
        let l = Quantale::luk01();
        let x = VCat::new(
            l,
            states(3),
            vec![
                vec![r(0, 1), r(0, 1), r(1, 2)],
                vec![r(0, 1), r(0, 1), r(1, 2)],
                vec![r(1, 2), r(1, 2), r(0, 1)],
            ],
        )
        .unwrap();
        let closure = x.l_closure(&[1].into_iter().collect());
        assert_eq!(closure, [0, 1].into_iter().collect());
        let all: BTreeSet<usize> = (0..3).collect();
        assert_eq!(x.l_closure(&all), all);
    }

    #[test]
    fn nonexpansive_enumeration_matches_brute_force() {
        let d = Quantale::diamond4();
        let n = d.parse_value("N").unwrap();
        let x = VCat::new(
            d.clone(),
            states(3),
            vec![vec![d.top(), n.clone(), d.bottom()], vec![n, d.top(), d.bottom()], vec![d.bottom(), d.bottom(), d.top()]],
        )
        .unwrap();
        let values = d.elements().unwrap();
        let found: BTreeSet<Vec<QValue>> = x.nonexpansive_maps(&values).into_iter().collect();
        let mut brute = BTreeSet::new();
        for a in &values {
            for b in &values {
                for c in &values {
                    let f = vec![a.clone(), b.clone(), c.clone()];
                    if x.is_nonexpansive(&f) {
                        brute.insert(f);
                    }
                }
            }
        }
        assert_eq!(found, brute);
        assert_eq!(found.len(), brute.len());
    }

    #[test]
    fn repair_yields_vcat() {
        let d = Quantale::diamond4();
        let n = d.parse_value("N").unwrap();
        let bb = d.parse_value("B").unwrap();
        let mut m = vec![vec![d.bottom(), n.clone(), d.bottom()], vec![n, d.bottom(), bb.clone()], vec![d.bottom(), bb, d.bottom()]];
        repair_to_vcat(&d, &mut m);
        assert!(VCat::new(d, states(3), m).unwrap().validate().is_symmetric_vcat());
    }
}
