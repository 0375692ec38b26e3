//! Closure operators on predicate sets and executable density checks.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::quantale::{QValue, Quantale, QuantaleError};
use crate::random::{self, Rng8};
use crate::rational::{self, Rat};
use crate::systems::{Functor, FunctorValue, Modality};
use crate::vcat::{self, VCat};

pub type Predicate = Vec<QValue>;
pub type PredicateSet = BTreeSet<Predicate>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClosureOp {
    Id,
    L,
    CInfSup,
    Inf,
    Fun,
}

impl ClosureOp {
    pub const ALL: [ClosureOp; 5] = [ClosureOp::Id, ClosureOp::L, ClosureOp::CInfSup, ClosureOp::Inf, ClosureOp::Fun];

    pub fn name(self) -> &'static str {
        match self {
            ClosureOp::Id => "id",
            ClosureOp::L => "l",
            ClosureOp::CInfSup => "cinfsup",
            ClosureOp::Inf => "inf",
            ClosureOp::Fun => "fun",
        }
    }

    pub fn parse(text: &str) -> Option<ClosureOp> {
        ClosureOp::ALL.into_iter().find(|op| op.name().eq_ignore_ascii_case(text))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClosureError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search space of {0} maps exceeds the limit")]
    TooLarge(usize),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
}

#[derive(Clone, Debug)]
pub struct ClosureOptions {
    /// Value grid for unit-interval quantales.
    pub grid: Rat,
    /// Largest predicate set built by propositional closure.
    pub cap: usize,
    /// Largest ambient space enumerated for `L` and `Fun`.
    pub max_ambient: usize,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions { grid: rational::rat(1, 4), cap: 4096, max_ambient: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropClosure {
    pub predicates: PredicateSet,
    /// Set when the cap stopped the closure early.
    pub truncated: bool,
}

fn constants(q: &Quantale, options: &ClosureOptions) -> Vec<QValue> {
    q.elements().unwrap_or_else(|| q.elements_or_grid(&options.grid))
}

/// Least set containing `g` and the constant `⊤` that is closed under `∧`,
/// `∨`, `u ⊗ −` and `hom_s(u, −)`, computed semi-naively.
pub fn prop_algebra_closure(q: &Quantale, n: usize, g: &PredicateSet, options: &ClosureOptions) -> PropClosure {
    let consts = constants(q, options);
    let mut order: Vec<Predicate> = Vec::new();
    let mut seen: PredicateSet = BTreeSet::new();
    let mut push = |p: Predicate, order: &mut Vec<Predicate>| {
        if seen.insert(p.clone()) {
            order.push(p);
        }
    };
    push(alloc::vec![q.top(); n], &mut order);
    for p in g {
        push(p.clone(), &mut order);
    }
    let mut start = 0;
    let mut truncated = false;
    'outer: while start < order.len() {
        let end = order.len();
        for i in start..end {
            let fi = order[i].clone();
            let mut fresh: Vec<Predicate> = Vec::new();
            for u in &consts {
                fresh.push(fi.iter().map(|v| q.tensor(u, v)).collect());
                fresh.push(fi.iter().map(|v| q.hom_s(u, v)).collect());
            }
            for j in 0..end {
                if j >= start && j > i {
                    continue;
                }
                let fj = &order[j];
                fresh.push(fi.iter().zip(fj).map(|(a, b)| q.meet2(a, b)).collect());
                fresh.push(fi.iter().zip(fj).map(|(a, b)| q.join2(a, b)).collect());
            }
            for p in fresh {
                push(p, &mut order);
                if order.len() >= options.cap {
                    truncated = true;
                    break 'outer;
                }
            }
        }
        start = end;
    }
    PropClosure { predicates: order.into_iter().collect(), truncated }
}

/// `true` when the set is closed under the propositional operations.
pub fn is_prop_algebra(q: &Quantale, n: usize, set: &PredicateSet, options: &ClosureOptions) -> bool {
    let closed = prop_algebra_closure(q, n, set, options);
    !closed.truncated && closed.predicates == *set
}

/// Every map from an `n`-point carrier into `values`.
pub fn all_maps(values: &[QValue], n: usize, limit: usize) -> Result<Vec<Predicate>, ClosureError> {
    let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(values.len())).unwrap_or(usize::MAX);
    if total > limit {
        return Err(ClosureError::TooLarge(total));
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = alloc::vec![0usize; n];
    loop {
        out.push(idx.iter().map(|&i| values[i].clone()).collect());
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < values.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// All V-functors from `x` into `V_s`.
pub fn vfunctors(x: &VCat, options: &ClosureOptions) -> Result<PredicateSet, ClosureError> {
    let q = x.quantale();
    let values = q
        .elements()
        .ok_or_else(|| ClosureError::Unsupported(alloc::format!("V-functor enumeration over {}", q.kind().name())))?;
    let mut out = BTreeSet::new();
    let mut count = 0usize;
    let mut overflow = false;
    x.for_each_nonexpansive_map(&values, |f| {
        count += 1;
        if count > options.max_ambient {
            overflow = true;
            return false;
        }
        out.insert(f.to_vec());
        true
    });
    if overflow {
        return Err(ClosureError::TooLarge(count));
    }
    Ok(out)
}

fn join_closure(q: &Quantale, n: usize, a: &PredicateSet, meet: bool) -> PredicateSet {
    let unit = if meet { q.top() } else { q.bottom() };
    let mut out: PredicateSet = a.clone();
    out.insert(alloc::vec![unit; n]);
    let mut frontier: Vec<Predicate> = out.iter().cloned().collect();
    while !frontier.is_empty() {
        let current: Vec<Predicate> = out.iter().cloned().collect();
        let mut next = Vec::new();
        for f in &frontier {
            for g in &current {
                let h: Predicate =
                    f.iter().zip(g).map(|(u, v)| if meet { q.meet2(u, v) } else { q.join2(u, v) }).collect();
                if !out.contains(&h) {
                    out.insert(h.clone());
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Applies a closure operator to `a`, a set of predicates on the carrier
/// of `x`.
pub fn close(op: ClosureOp, x: &VCat, a: &PredicateSet, options: &ClosureOptions) -> Result<PredicateSet, ClosureError> {
    let q = x.quantale();
    let n = x.len();
    match op {
        ClosureOp::Id => Ok(a.clone()),
        ClosureOp::L => {
            let ambient = all_maps(&constants(q, options), n, options.max_ambient)?;
            let k = q.unit();
            let mut out = a.clone();
            for p in ambient {
                if out.contains(&p) {
                    continue;
                }
                let reach: Vec<QValue> =
                    a.iter().map(|f| q.tensor(&vcat::power_hom_s(q, &p, f), &vcat::power_hom_s(q, f, &p))).collect();
                if q.leq(&k, &q.join(reach.iter())) {
                    out.insert(p);
                }
            }
            Ok(out)
        }
        ClosureOp::CInfSup => {
            require_finite(q, op)?;
            // a finite codirected family contains its infimum, so only
            // finite suprema add predicates
            Ok(join_closure(q, n, a, false))
        }
        ClosureOp::Inf => {
            require_finite(q, op)?;
            Ok(join_closure(q, n, a, true))
        }
        ClosureOp::Fun => {
            require_finite(q, op)?;
            let induced = vcat::initial_from_predicates(q, x.states().to_vec(), a.iter().map(|f| f.as_slice()));
            vfunctors(&induced, options)
        }
    }
}

fn require_finite(q: &Quantale, op: ClosureOp) -> Result<(), ClosureError> {
    if q.is_finite() {
        Ok(())
    } else {
        Err(ClosureError::Unsupported(alloc::format!("{} over {}", op.name(), q.kind().name())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureLaws {
    pub extensive: bool,
    pub monotone: bool,
    pub idempotent: bool,
}

impl ClosureLaws {
    pub fn passed(&self) -> bool {
        self.extensive && self.monotone && self.idempotent
    }
}

/// Extensiveness and idempotence on `a`, monotonicity on `a ⊆ a ∪ b`.
pub fn check_closure_laws(
    op: ClosureOp,
    x: &VCat,
    a: &PredicateSet,
    b: &PredicateSet,
    options: &ClosureOptions,
) -> Result<ClosureLaws, ClosureError> {
    let ca = close(op, x, a, options)?;
    let bigger: PredicateSet = a.union(b).cloned().collect();
    let cb = close(op, x, &bigger, options)?;
    let cca = close(op, x, &ca, options)?;
    Ok(ClosureLaws { extensive: a.is_subset(&ca), monotone: ca.is_subset(&cb), idempotent: cca == ca })
}

/// `C(A) ⊆ Fun(A)`.
pub fn check_dominance(op: ClosureOp, x: &VCat, a: &PredicateSet, options: &ClosureOptions) -> Result<bool, ClosureError> {
    let c = close(op, x, a, options)?;
    let f = close(ClosureOp::Fun, x, a, options)?;
    Ok(c.is_subset(&f))
}

/// When `C(A)` is the full V-functor set of `x`, the initial structure of
/// `A` must be `x` itself. Returns `None` when `A` is not C-dense.
pub fn check_dense_implies_initial(
    op: ClosureOp,
    x: &VCat,
    a: &PredicateSet,
    options: &ClosureOptions,
) -> Result<Option<bool>, ClosureError> {
    let c = close(op, x, a, options)?;
    if c != vfunctors(x, options)? {
        return Ok(None);
    }
    let induced = vcat::initial_from_predicates(x.quantale(), x.states().to_vec(), a.iter().map(|f| f.as_slice()));
    Ok(Some(induced == *x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialityTrial {
    pub seed: u64,
    pub vcat: VCat,
    pub generators: Vec<Predicate>,
    pub c_dense: bool,
    pub fun_dense: bool,
}

impl InitialityTrial {
    pub fn passed(&self) -> bool {
        self.c_dense == self.fun_dense
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitialityReport {
    pub op: ClosureOp,
    pub quantale: String,
    pub trials: Vec<InitialityTrial>,
}

impl InitialityReport {
    pub fn passed(&self) -> usize {
        self.trials.iter().filter(|t| t.passed()).count()
    }
}

/// Samples a finite symmetric V-category and generators. Half the trials
/// take the structure induced by the generators; the rest sample the
/// structure first and generators among its V-functors.
fn sample_instance(r: &mut Rng8, q: &Quantale, size_bound: usize, options: &ClosureOptions) -> Result<(VCat, Vec<Predicate>), ClosureError> {
    let pool = random::value_pool(q, &options.grid);
    let n = r.gen_range(1..=size_bound.max(1));
    if r.gen_bool(0.5) {
        let count = r.gen_range(1..=3);
        let gens: Vec<Predicate> = (0..count).map(|_| random::random_predicate(r, n, &pool)).collect();
        let x = vcat::initial_from_predicates(q, VCat::numbered_states(n), gens.iter().map(|f| f.as_slice()));
        Ok((x, gens))
    } else {
        let x = random::random_vcat(r, q, n, &pool);
        let maps: Vec<Predicate> = vfunctors(&x, options)?.into_iter().collect();
        let count = r.gen_range(0..=2);
        let gens = (0..count).filter_map(|_| maps.get(r.gen_range(0..maps.len().max(1))).cloned()).collect();
        Ok((x, gens))
    }
}

/// One trial of the density biconditional: the propositional algebra
/// generated by the sample is C-dense exactly when it is Fun-dense.
pub fn initiality_trial(
    op: ClosureOp,
    q: &Quantale,
    size_bound: usize,
    seed: u64,
    options: &ClosureOptions,
) -> Result<InitialityTrial, ClosureError> {
    let mut r = random::rng(seed);
    let (x, generators) = sample_instance(&mut r, q, size_bound, options)?;
    let gens: PredicateSet = generators.iter().cloned().collect();
    let algebra = prop_algebra_closure(q, x.len(), &gens, options);
    if algebra.truncated {
        return Err(ClosureError::TooLarge(algebra.predicates.len()));
    }
    let full = vfunctors(&x, options)?;
    let c_dense = close(op, &x, &algebra.predicates, options)? == full;
    let fun_dense = close(ClosureOp::Fun, &x, &algebra.predicates, options)? == full;
    Ok(InitialityTrial { seed, vcat: x, generators, c_dense, fun_dense })
}

pub fn check_characterizes_initiality(
    op: ClosureOp,
    q: &Quantale,
    size_bound: usize,
    trials: usize,
    seed: u64,
    options: &ClosureOptions,
) -> Result<InitialityReport, ClosureError> {
    if !q.is_finite() {
        return Err(ClosureError::Unsupported(alloc::format!("initiality checks over {}", q.kind().name())));
    }
    let trials = random::trial_seeds(seed, trials)
        .into_iter()
        .map(|s| initiality_trial(op, q, size_bound, s, options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InitialityReport { op, quantale: q.kind().name().to_string(), trials })
}

/// `⋁_x ⋀_{ψ∈A} f(x) ⊗ hom_s(ψ(x), ψ)` evaluated on every point.
pub fn decomposition_rhs(q: &Quantale, a: &[Predicate], f: &[QValue]) -> Predicate {
    let n = f.len();
    (0..n)
        .map(|y| {
            let terms: Vec<QValue> = (0..n)
                .map(|x| {
                    let parts: Vec<QValue> = a.iter().map(|psi| q.tensor(&f[x], &q.hom_s(&psi[x], &psi[y]))).collect();
                    q.meet(parts.iter())
                })
                .collect();
            q.join(terms.iter())
        })
        .collect()
}

/// Compares a nonexpansive `f` with its decomposition over an initial
/// generating set.
pub fn check_decomposition(x: &VCat, a: &[Predicate], f: &[QValue]) -> Result<bool, ClosureError> {
    let q = x.quantale();
    if !q.tensor_preserves_codirected_infima()? {
        return Err(ClosureError::Precondition("u ⊗ − does not preserve codirected infima".into()));
    }
    let induced = vcat::initial_from_predicates(q, x.states().to_vec(), a.iter().map(|p| p.as_slice()));
    if induced != *x {
        return Err(ClosureError::Precondition("generating set is not initial".into()));
    }
    if let Some((u, v)) = x.nonexpansiveness_violation(f) {
        return Err(ClosureError::Precondition(alloc::format!("f is not nonexpansive at ({u}, {v})")));
    }
    Ok(decomposition_rhs(q, a, f) == f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionTrial {
    pub seed: u64,
    pub generators: Vec<Predicate>,
    pub f: Predicate,
    pub holds: bool,
}

/// Random initial generating sets and nonexpansive `f` on their induced
/// structure.
pub fn decomposition_trials(q: &Quantale, size_bound: usize, trials: usize, seed: u64) -> Result<Vec<DecompositionTrial>, ClosureError> {
    random::trial_seeds(seed, trials).into_iter().map(|s| decomposition_trial(q, size_bound, s)).collect()
}

/// One decomposition trial from its per-trial seed.
pub fn decomposition_trial(q: &Quantale, size_bound: usize, seed: u64) -> Result<DecompositionTrial, ClosureError> {
    let pool = q.elements().ok_or_else(|| ClosureError::Unsupported("decomposition trials need a finite quantale".into()))?;
    let mut r = random::rng(seed);
    let n = r.gen_range(1..=size_bound.max(1));
    let count = r.gen_range(1..=3);
    let generators: Vec<Predicate> = (0..count).map(|_| random::random_predicate(&mut r, n, &pool)).collect();
    let x = vcat::initial_from_predicates(q, VCat::numbered_states(n), generators.iter().map(|f| f.as_slice()));
    let f = random::random_nonexpansive(&mut r, &x, &pool).expect("constant maps are nonexpansive");
    let holds = check_decomposition(&x, &generators, &f)?;
    Ok(DecompositionTrial { seed, generators, f, holds })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuityFailure {
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuityReport {
    pub checked: usize,
    pub failures: Vec<ContinuityFailure>,
}

/// Samples `λ(C(A)) ⊆ C(λ(A))` on finitely many functor values. For
/// unit-interval quantales only `Id` and `L` apply; `L` is checked as
/// `|λ(f)(t) − λ(g)(t)| ≤ sup |f − g|` along grid sequences.
pub fn check_c_continuity(
    functor: &Functor,
    modality: &Modality,
    op: ClosureOp,
    q: &Quantale,
    samples: usize,
    seed: u64,
    options: &ClosureOptions,
) -> Result<ContinuityReport, ClosureError> {
    functor.check_quantale(q).map_err(|e| ClosureError::Precondition(e.to_string()))?;
    functor.resolve_modality(modality).map_err(|e| ClosureError::Precondition(e.to_string()))?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for s in random::trial_seeds(seed, samples) {
        let mut r = random::rng(s);
        let n = r.gen_range(1..=3usize);
        let values = sample_values(&mut r, functor, q, n);
        let apply = |f: &[QValue], t: &FunctorValue| functor.apply(q, modality, f, t).expect("resolved modality");
        if q.is_unit_interval() {
            match op {
                ClosureOp::Id => {}
                ClosureOp::L => {
                    let f: Predicate = (0..n).map(|_| QValue::Num(rational::rat(r.gen_range(0..=16), 16))).collect();
                    for k in 1..=6u32 {
                        let step = rational::rat(1, 1 << k);
                        let g: Predicate = f
                            .iter()
                            .map(|v| {
                                let sign = if r.gen_bool(0.5) { rational::one() } else { -rational::one() };
                                QValue::Num(rational::clamp01(q.numeric(v).expect("numeric").clone() + sign * &step))
                            })
                            .collect();
                        let sup = f.iter().zip(&g).map(|(a, b)| q.numeric(&q.hom_s(a, b)).cloned().expect("numeric")).max();
                        let sup = sup.unwrap_or_else(rational::zero);
                        for t in &values {
                            checked += 1;
                            let diff = q.numeric(&q.hom_s(&apply(&f, t), &apply(&g, t))).cloned().expect("numeric");
                            if diff > sup {
                                failures.push(ContinuityFailure {
                                    seed: s,
                                    detail: alloc::format!("value moved by {} for a predicate step of {}", rational::format_rat(&diff), rational::format_rat(&sup)),
                                });
                            }
                        }
                    }
                }
                _ => return Err(ClosureError::Unsupported(alloc::format!("{} over {}", op.name(), q.kind().name()))),
            }
            continue;
        }
        let pool = random::value_pool(q, &options.grid);
        let x = random::random_vcat(&mut r, q, n, &pool);
        let maps: Vec<Predicate> = vfunctors(&x, options)?.into_iter().collect();
        let a: PredicateSet = (0..r.gen_range(1..=3)).map(|_| maps[r.gen_range(0..maps.len())].clone()).collect();
        let ca = close(op, &x, &a, options)?;
        let lifted = |f: &Predicate| -> Predicate { values.iter().map(|t| apply(f, t)).collect() };
        let la: PredicateSet = a.iter().map(lifted).collect();
        let target = VCat::discrete(q.clone(), VCat::numbered_states(values.len()));
        let cla = close(op, &target, &la, options)?;
        for g in &ca {
            checked += 1;
            if !cla.contains(&lifted(g)) {
                failures.push(ContinuityFailure {
                    seed: s,
                    detail: alloc::format!("lifted closure member {:?} is outside the closure of lifted generators", lifted(g)),
                });
            }
        }
    }
    Ok(ContinuityReport { checked, failures })
}

fn sample_values(r: &mut Rng8, functor: &Functor, q: &Quantale, n: usize) -> Vec<FunctorValue> {
    let count = r.gen_range(1..=3);
    let c = match functor {
        Functor::Lts { labels } => random::random_lts(r, q, n, labels.len(), 0.4),
        Functor::MetricTs => random::random_metric_ts(r, q, n, 8, 0.4),
        Functor::ParaPowerset => random::random_para(r, n, 0.4),
        Functor::DistMaybe { labels } => random::random_dist(r, n, labels.len(), 4),
        Functor::SignedWeighted { labels } => random::random_signed(r, n, labels.len()),
    };
    c.transitions().iter().take(count).cloned().collect()
}
