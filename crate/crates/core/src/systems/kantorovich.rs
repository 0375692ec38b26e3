use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::lp;
use crate::quantale::{QValue, Quantale, QuantaleKind};
use crate::rational::{self, Rat};
use crate::vcat::VCat;

use super::functor::{Distribution, Functor, FunctorValue};
use super::lifting::Modality;
use super::SystemsError;

/// How lifted distances are computed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Meet over every nonexpansive predicate with values in the carrier
    /// (finite quantales) or on the grid of the given step. Exact for finite
    /// quantales, a numeric lower bound otherwise.
    Enumerate { grid: Rat },
    /// Exact linear programming; only for expectation and weight liftings.
    Lp,
    /// The exact method for the functor and quantale at hand.
    Auto,
}

/// A single predicate together with the lifting it is fed to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub modality: Modality,
    pub predicate: Vec<QValue>,
}

/// Lifted distance plus witnesses whose `hom_s` gaps meet to the distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifted {
    pub value: QValue,
    pub witnesses: Vec<Witness>,
}

enum Method {
    BoolClasses,
    Enumerate(Vec<QValue>),
    Transport,
    WeightLp,
    Hausdorff,
}

impl Method {
    fn select(functor: &Functor, q: &Quantale, backend: &Backend) -> Result<Method, SystemsError> {
        match backend {
            Backend::Enumerate { grid } => {
                if !rational::divides_one(grid) {
                    return Err(SystemsError::Invalid("grid step must divide 1".into()));
                }
                Ok(Method::Enumerate(q.elements_or_grid(grid)))
            }
            Backend::Lp => match functor {
                Functor::DistMaybe { .. } => Ok(Method::Transport),
                Functor::SignedWeighted { .. } => Ok(Method::WeightLp),
                _ => Err(SystemsError::Unsupported(alloc::format!(
                    "the LP backend only handles expectation and weight liftings, not {}",
                    functor.name()
                ))),
            },
            Backend::Auto => match functor {
                Functor::Lts { .. } if q.kind() == QuantaleKind::Bool2 => Ok(Method::BoolClasses),
                _ if q.is_finite() => Ok(Method::Enumerate(q.elements().unwrap_or_default())),
                Functor::DistMaybe { .. } => Ok(Method::Transport),
                Functor::SignedWeighted { .. } => Ok(Method::WeightLp),
                Functor::Lts { .. } | Functor::MetricTs if q.is_unit_interval() => Ok(Method::Hausdorff),
                _ => Err(SystemsError::Unsupported(alloc::format!("no exact method for {} over {:?}", functor.name(), q))),
            },
        }
    }
}

/// Values `λ(f)(t)` for every modality and enumerated predicate.
struct EvalTable {
    entries: Vec<(Modality, usize)>,
    pool: Vec<Vec<QValue>>,
    rows: Vec<Vec<QValue>>,
}

impl EvalTable {
    fn new(functor: &Functor, b: &VCat, values: &[QValue], targets: &[&FunctorValue]) -> Result<Self, SystemsError> {
        let q = b.quantale();
        let pool = b.nonexpansive_maps(values);
        let mut entries = Vec::new();
        for modality in functor.modalities() {
            if modality.is_nullary() {
                entries.push((modality, 0));
            } else {
                entries.extend((0..pool.len()).map(|i| (modality.clone(), i)));
            }
        }
        let rows = targets
            .iter()
            .map(|t| entries.iter().map(|(m, i)| functor.apply(q, m, &pool[*i], t)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EvalTable { entries, pool, rows })
    }

    fn distance(&self, q: &Quantale, i: usize, j: usize) -> QValue {
        let gaps: Vec<QValue> = self.rows[i].iter().zip(&self.rows[j]).map(|(u, v)| q.hom_s(u, v)).collect();
        q.meet(gaps.iter())
    }

    fn witness(&self, q: &Quantale, i: usize, j: usize) -> Lifted {
        let gaps: Vec<QValue> = self.rows[i].iter().zip(&self.rows[j]).map(|(u, v)| q.hom_s(u, v)).collect();
        let value = q.meet(gaps.iter());
        let chosen = greedy_cover(q, &gaps, &value);
        let witnesses = chosen
            .into_iter()
            .map(|e| Witness { modality: self.entries[e].0.clone(), predicate: self.pool[self.entries[e].1].clone() })
            .collect();
        Lifted { value, witnesses }
    }
}

/// Indices of a small subfamily of `gaps` whose meet is `target`.
fn greedy_cover(q: &Quantale, gaps: &[QValue], target: &QValue) -> Vec<usize> {
    if let Some(i) = gaps.iter().position(|g| g == target) {
        return vec![i];
    }
    let mut acc = q.top();
    let mut chosen = Vec::new();
    for (i, g) in gaps.iter().enumerate() {
        let next = q.meet2(&acc, g);
        if next != acc {
            acc = next;
            chosen.push(i);
            if acc == *target {
                break;
            }
        }
    }
    chosen
}

/// Equivalence classes of a symmetric two-valued structure.
fn classes(b: &VCat) -> Vec<usize> {
    let order = b.natural_order();
    let mut class = vec![usize::MAX; b.len()];
    let mut next = 0;
    for x in 0..b.len() {
        if class[x] == usize::MAX {
            for y in x..b.len() {
                if class[y] == usize::MAX && order[x][y] && order[y][x] {
                    class[y] = next;
                }
            }
            next += 1;
        }
    }
    class
}

fn numeric(q: &Quantale, v: &QValue) -> Rat {
    q.numeric(v).cloned().expect("unit-interval value")
}

fn hausdorff(q: &Quantale, b: &VCat, s1: &BTreeSet<usize>, s2: &BTreeSet<usize>) -> (Rat, Option<usize>) {
    match (s1.is_empty(), s2.is_empty()) {
        (true, true) => return (rational::zero(), None),
        (true, false) | (false, true) => return (rational::one(), None),
        _ => {}
    }
    let mut best = (rational::zero(), None);
    for (from, to) in [(s1, s2), (s2, s1)] {
        for &y in to {
            let nearest = from.iter().map(|&x| numeric(q, b.get(x, y))).min().expect("nonempty");
            if nearest > best.0 {
                best = (nearest, Some(y));
            }
        }
    }
    best
}

/// Ground points of two distributions: the union of supports plus deadlock.
fn ground(b: &VCat, mu: &Distribution, nu: &Distribution) -> (Vec<usize>, Vec<Vec<Rat>>, Vec<Rat>, Vec<Rat>) {
    let q = b.quantale();
    let points: Vec<usize> = mu.mass.keys().chain(nu.mass.keys()).copied().collect::<BTreeSet<_>>().into_iter().collect();
    let p = points.len();
    let mut cost = vec![vec![rational::one(); p + 1]; p + 1];
    for (i, &x) in points.iter().enumerate() {
        for (j, &y) in points.iter().enumerate() {
            cost[i][j] = numeric(q, b.get(x, y));
        }
    }
    cost[p][p] = rational::zero();
    let weights = |d: &Distribution| {
        let mut w: Vec<Rat> = points.iter().map(|x| d.mass.get(x).cloned().unwrap_or_else(rational::zero)).collect();
        w.push(d.deadlock.clone());
        w
    };
    let (supply, demand) = (weights(mu), weights(nu));
    (points, cost, supply, demand)
}

/// Kantorovich distance between two distributions over a `luk01`
/// pseudometric, with the deadlock point at distance 1 from every state.
pub fn kantorovich_lp(b: &VCat, mu: &Distribution, nu: &Distribution) -> Result<Rat, SystemsError> {
    if b.quantale().kind() != QuantaleKind::Luk01 {
        return Err(SystemsError::Mismatch("the transportation distance needs a luk01 structure".into()));
    }
    let (_, cost, supply, demand) = ground(b, mu, nu);
    Ok(lp::transport(&supply, &demand, &cost)?.cost)
}

/// Optimal predicate for the expectation lifting: returns the distance and
/// a nonexpansive `f` with `|E_μ f⁺ − E_ν f⁺|` equal to it.
pub fn expectation_witness(b: &VCat, mu: &Distribution, nu: &Distribution) -> Result<(Rat, Vec<QValue>), SystemsError> {
    let q = b.quantale();
    let (points, cost, supply, demand) = ground(b, mu, nu);
    let p = points.len();
    let w: Vec<Rat> = supply.iter().zip(&demand).map(|(a, c)| a - c).collect();
    let potential = lp::lipschitz_dual(&w, &cost)?;
    let g_star = &potential.g[p];
    // clipped McShane extension from the ground points to the whole carrier
    let g: Vec<Rat> = (0..b.len())
        .map(|z| {
            let mut best = g_star + rational::one();
            for (i, &s) in points.iter().enumerate() {
                let via = &potential.g[i] + numeric(q, b.get(s, z));
                if via < best {
                    best = via;
                }
            }
            rational::min(&best, &rational::one())
        })
        .collect();
    // move the deadlock value to an extreme of the range, then normalise so
    // that deadlock sits at 1
    let f: Vec<Rat> = if !w[p].is_negative() {
        let m = g.iter().min().cloned().unwrap_or_else(rational::zero);
        g.iter().map(|v| v - &m).collect()
    } else {
        let m = g.iter().max().cloned().unwrap_or_else(rational::one);
        g.iter().map(|v| &m - v).collect()
    };
    let expect = |d: &Distribution| d.mass.iter().map(|(&x, m)| m * &f[x]).sum::<Rat>() + &d.deadlock;
    let gap = (expect(mu) - expect(nu)).abs();
    Ok((gap, f.into_iter().map(QValue::Num).collect()))
}

/// `½ sup_f |Σ f (s − t)|` over nonexpansive `f : X → [0,1]`, with an
/// optimal `f`.
pub fn weight_witness(
    b: &VCat,
    s: &alloc::collections::BTreeMap<usize, Rat>,
    t: &alloc::collections::BTreeMap<usize, Rat>,
) -> Result<(Rat, Vec<QValue>), SystemsError> {
    let q = b.quantale();
    let points: Vec<usize> = s.keys().chain(t.keys()).copied().collect::<BTreeSet<_>>().into_iter().collect();
    let w: Vec<Rat> = points
        .iter()
        .map(|x| s.get(x).cloned().unwrap_or_else(rational::zero) - t.get(x).cloned().unwrap_or_else(rational::zero))
        .collect();
    let dist: Vec<Vec<Rat>> = points.iter().map(|&x| points.iter().map(|&y| numeric(q, b.get(x, y))).collect()).collect();
    let up = lp::lipschitz_dual(&w, &dist)?;
    let negated: Vec<Rat> = w.iter().map(|v| -v).collect();
    let down = lp::lipschitz_dual(&negated, &dist)?;
    let best = if up.value >= down.value { up } else { down };
    let f: Vec<Rat> = (0..b.len())
        .map(|z| {
            let mut v = rational::one();
            for (i, &x) in points.iter().enumerate() {
                let via = &best.g[i] + numeric(q, b.get(x, z));
                if via < v {
                    v = via;
                }
            }
            v
        })
        .collect();
    let sum: Rat = points.iter().zip(&w).map(|(&x, wx)| wx * &f[x]).sum();
    Ok((sum.abs() / rational::rat(2, 1), f.into_iter().map(QValue::Num).collect()))
}

fn pair(functor: &Functor, b: &VCat, method: &Method, t1: &FunctorValue, t2: &FunctorValue) -> Result<Lifted, SystemsError> {
    let q = b.quantale();
    let labels = functor.labels();
    match (method, t1, t2) {
        (Method::BoolClasses, FunctorValue::Lts(s1), FunctorValue::Lts(s2)) => {
            let class = classes(b);
            for (a, (x, y)) in s1.iter().zip(s2).enumerate() {
                let c1: BTreeSet<usize> = x.iter().map(|&s| class[s]).collect();
                let c2: BTreeSet<usize> = y.iter().map(|&s| class[s]).collect();
                if let Some(&c) = c1.symmetric_difference(&c2).next() {
                    let predicate = class.iter().map(|&k| if k == c { q.top() } else { q.bottom() }).collect();
                    return Ok(Lifted {
                        value: q.bottom(),
                        witnesses: vec![Witness { modality: Modality::Dia(Some(labels[a].clone())), predicate }],
                    });
                }
            }
            let top = Witness { modality: functor.modalities().remove(0), predicate: vec![q.top(); b.len()] };
            Ok(Lifted { value: q.top(), witnesses: if labels.is_empty() { vec![] } else { vec![top] } })
        }
        (Method::Transport, FunctorValue::Dist(d1), FunctorValue::Dist(d2)) => {
            let mut best = (rational::zero(), 0usize);
            for (a, (mu, nu)) in d1.iter().zip(d2).enumerate() {
                let w = kantorovich_lp(b, mu, nu)?;
                if w > best.0 {
                    best = (w, a);
                }
            }
            Ok(Lifted { value: QValue::Num(best.0), witnesses: Vec::new() })
        }
        (Method::WeightLp, FunctorValue::Signed(w1), FunctorValue::Signed(w2)) => {
            let mut best = (rational::zero(), 0usize, vec![QValue::Num(rational::zero()); b.len()]);
            for (a, (s, t)) in w1.iter().zip(w2).enumerate() {
                let (v, f) = weight_witness(b, s, t)?;
                if v > best.0 || a == 0 {
                    best = (v, a, f);
                }
            }
            let witnesses = if labels.is_empty() {
                vec![]
            } else {
                vec![Witness { modality: Modality::Wgt(labels[best.1].clone(), rational::rat(1, 2)), predicate: best.2 }]
            };
            Ok(Lifted { value: QValue::Num(best.0), witnesses })
        }
        (Method::Hausdorff, _, _) => {
            let pairs: Vec<(Modality, &BTreeSet<usize>, &BTreeSet<usize>)> = match (t1, t2) {
                (FunctorValue::Lts(s1), FunctorValue::Lts(s2)) => {
                    s1.iter().zip(s2).enumerate().map(|(a, (x, y))| (Modality::Dia(Some(labels[a].clone())), x, y)).collect()
                }
                (FunctorValue::MetricTs(_, x), FunctorValue::MetricTs(_, y)) => vec![(Modality::Dia(None), x, y)],
                _ => return Err(SystemsError::Mismatch("functor value kinds differ".into())),
            };
            let mut value = q.top();
            let mut witness = None;
            if let (FunctorValue::MetricTs(r1, _), FunctorValue::MetricTs(r2, _)) = (t1, t2) {
                value = q.hom_s(&QValue::Num(r1.clone()), &QValue::Num(r2.clone()));
                witness = Some(Witness { modality: Modality::O, predicate: vec![q.top(); b.len()] });
            }
            for (modality, x, y) in pairs {
                let (h, centre) = hausdorff(q, b, x, y);
                let candidate = QValue::Num(h);
                if witness.is_none() || !q.leq(&value, &candidate) {
                    value = q.meet2(&value, &candidate);
                    let predicate = match centre {
                        Some(c) => (0..b.len()).map(|z| b.get(z, c).clone()).collect(),
                        None => vec![q.top(); b.len()],
                    };
                    witness = Some(Witness { modality, predicate });
                }
            }
            Ok(Lifted { value, witnesses: witness.into_iter().collect() })
        }
        (Method::Enumerate(values), _, _) => {
            let table = EvalTable::new(functor, b, values, &[t1, t2])?;
            Ok(table.witness(q, 0, 1))
        }
        _ => Err(SystemsError::Mismatch("functor value kinds differ".into())),
    }
}

/// Lifted distance between two functor values over `(X, b)`.
pub fn lifted_distance(
    functor: &Functor,
    b: &VCat,
    t1: &FunctorValue,
    t2: &FunctorValue,
    backend: &Backend,
) -> Result<QValue, SystemsError> {
    functor.check_quantale(b.quantale())?;
    let method = Method::select(functor, b.quantale(), backend)?;
    Ok(pair(functor, b, &method, t1, t2)?.value)
}

/// Lifted distance together with witnessing predicates.
pub fn lifted_witness(
    functor: &Functor,
    b: &VCat,
    t1: &FunctorValue,
    t2: &FunctorValue,
    backend: &Backend,
) -> Result<Lifted, SystemsError> {
    functor.check_quantale(b.quantale())?;
    let method = Method::select(functor, b.quantale(), backend)?;
    match (&method, t1, t2) {
        (Method::Transport, FunctorValue::Dist(d1), FunctorValue::Dist(d2)) => {
            let labels = functor.labels();
            let mut best: Option<(Rat, usize, Vec<QValue>)> = None;
            for (a, (mu, nu)) in d1.iter().zip(d2).enumerate() {
                let (v, f) = expectation_witness(b, mu, nu)?;
                if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
                    best = Some((v, a, f));
                }
            }
            Ok(match best {
                Some((v, a, f)) => Lifted {
                    value: QValue::Num(v),
                    witnesses: vec![Witness { modality: Modality::Exp(Some(labels[a].clone())), predicate: f }],
                },
                None => Lifted { value: b.quantale().top(), witnesses: Vec::new() },
            })
        }
        _ => pair(functor, b, &method, t1, t2),
    }
}

/// Lifted distances among all `values`, as a square matrix.
pub fn lift_matrix(functor: &Functor, b: &VCat, values: &[&FunctorValue], backend: &Backend) -> Result<Vec<Vec<QValue>>, SystemsError> {
    let q = b.quantale();
    functor.check_quantale(q)?;
    let method = Method::select(functor, q, backend)?;
    let m = values.len();
    if let Method::Enumerate(grid) = &method {
        let table = EvalTable::new(functor, b, grid, values)?;
        return Ok((0..m).map(|i| (0..m).map(|j| table.distance(q, i, j)).collect()).collect());
    }
    // the remaining methods work over integral quantales, where the diagonal is top
    let mut out = vec![vec![q.top(); m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let v = if values[i] == values[j] { q.top() } else { pair(functor, b, &method, values[i], values[j])?.value };
            out[i][j] = v.clone();
            out[j][i] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use alloc::string::ToString;

    fn luk_metric(d: &[&[(i64, i64)]]) -> VCat {
        let n = d.len();
        VCat::from_fn(Quantale::luk01(), VCat::numbered_states(n), |i, j| QValue::ratio(d[i][j].0, d[i][j].1))
    }

    #[test]
    fn two_point_transport() {
        let b = luk_metric(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        let mu = Distribution::dirac(0);
        let nu = Distribution { mass: [(0, rat(1, 2)), (1, rat(1, 2))].into_iter().collect(), deadlock: rat(0, 1) };
        assert_eq!(kantorovich_lp(&b, &mu, &nu).unwrap(), rat(1, 2));
        let functor = Functor::DistMaybe { labels: vec!["a".to_string()] };
        let t1 = FunctorValue::Dist(vec![mu]);
        let t2 = FunctorValue::Dist(vec![nu]);
        let grid = lifted_distance(&functor, &b, &t1, &t2, &Backend::Enumerate { grid: rat(1, 16) }).unwrap();
        assert_eq!(grid, QValue::ratio(1, 2));
    }

    #[test]
    fn deadlock_against_live_state_costs_one() {
        let b = luk_metric(&[&[(0, 1)]]);
        assert_eq!(kantorovich_lp(&b, &Distribution::dirac(0), &Distribution::deadlock()).unwrap(), rat(1, 1));
    }

    #[test]
    fn witness_matches_transport() {
        let b = luk_metric(&[&[(0, 1), (1, 4), (1, 2)], &[(1, 4), (0, 1), (1, 2)], &[(1, 2), (1, 2), (0, 1)]]);
        let mu = Distribution { mass: [(0, rat(1, 2)), (2, rat(1, 4))].into_iter().collect(), deadlock: rat(1, 4) };
        let nu = Distribution { mass: [(1, rat(3, 4))].into_iter().collect(), deadlock: rat(1, 4) };
        let w = kantorovich_lp(&b, &mu, &nu).unwrap();
        let (v, f) = expectation_witness(&b, &mu, &nu).unwrap();
        assert_eq!(v, w);
        assert!(b.is_nonexpansive(&f));
    }

    #[test]
    fn bool2_lts_distinguishes_by_successor_classes() {
        let q = Quantale::bool2();
        let b = VCat::discrete(q.clone(), VCat::numbered_states(1));
        let functor = Functor::Lts { labels: vec!["a".to_string()] };
        let t1 = FunctorValue::Lts(vec![[0].into_iter().collect()]);
        let t2 = FunctorValue::Lts(vec![BTreeSet::new()]);
        let lifted = lifted_witness(&functor, &b, &t1, &t2, &Backend::Auto).unwrap();
        assert_eq!(lifted.value, q.bottom());
        assert_eq!(lifted.witnesses[0].predicate, vec![q.top()]);
        let enumerated = lifted_distance(&functor, &b, &t1, &t2, &Backend::Enumerate { grid: rat(1, 2) }).unwrap();
        assert_eq!(enumerated, q.bottom());
    }

    #[test]
    fn weight_lifting_example() {
        let q = Quantale::luk01();
        let functor = Functor::SignedWeighted { labels: vec!["a".to_string()] };
        let t = FunctorValue::Signed(vec![[(0, rat(1, 2)), (1, rat(-1, 4))].into_iter().collect()]);
        let one = vec![QValue::ratio(1, 1); 2];
        let v = functor.apply(&q, &Modality::Wgt("a".to_string(), rat(0, 1)), &one, &t).unwrap();
        assert_eq!(v, QValue::ratio(1, 8));
    }

    #[test]
    fn lp_backend_rejects_other_liftings() {
        let b = VCat::discrete(Quantale::max01(), VCat::numbered_states(1));
        let t = FunctorValue::MetricTs(rat(0, 1), BTreeSet::new());
        assert!(matches!(
            lifted_distance(&Functor::MetricTs, &b, &t, &t, &Backend::Lp),
            Err(SystemsError::Unsupported(_))
        ));
    }
}
