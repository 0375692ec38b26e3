use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::quantale::{QValue, Quantale, QuantaleKind};
use crate::rational::{self, Rat};

use super::SystemsError;

/// The supported system types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Functor {
    /// Labelled transition systems: per label a successor set.
    Lts { labels: Vec<String> },
    /// A number in `[0,1]` plus a finite successor set.
    MetricTs,
    /// Four-valued successor maps into the diamond lattice.
    ParaPowerset,
    /// Per label a distribution over successors and a deadlock point.
    DistMaybe { labels: Vec<String> },
    /// Per label a finitely supported signed weight table.
    SignedWeighted { labels: Vec<String> },
}

impl Functor {
    pub fn name(&self) -> &'static str {
        match self {
            Functor::Lts { .. } => "lts",
            Functor::MetricTs => "metric_ts",
            Functor::ParaPowerset => "para_powerset",
            Functor::DistMaybe { .. } => "dist_maybe",
            Functor::SignedWeighted { .. } => "signed_weighted",
        }
    }

    pub fn labels(&self) -> &[String] {
        match self {
            Functor::Lts { labels } | Functor::DistMaybe { labels } | Functor::SignedWeighted { labels } => labels,
            Functor::MetricTs | Functor::ParaPowerset => &[],
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| l == label)
    }

    /// Checks that the functor can be interpreted over `q`.
    pub fn check_quantale(&self, q: &Quantale) -> Result<(), SystemsError> {
        let ok = match self {
            Functor::Lts { .. } => true,
            Functor::MetricTs => q.is_unit_interval(),
            Functor::ParaPowerset => q.kind() == QuantaleKind::Diamond4,
            Functor::DistMaybe { .. } | Functor::SignedWeighted { .. } => q.kind() == QuantaleKind::Luk01,
        };
        if ok {
            Ok(())
        } else {
            Err(SystemsError::Mismatch(alloc::format!("functor {} cannot be used over {:?}", self.name(), q)))
        }
    }

    /// `F g`: the action on a map `g` from an `n`-state carrier into a
    /// `target_len`-state carrier.
    pub fn map_value(&self, q: &Quantale, g: &[usize], target_len: usize, t: &FunctorValue) -> FunctorValue {
        match t {
            FunctorValue::Lts(per) => FunctorValue::Lts(per.iter().map(|s| s.iter().map(|&x| g[x]).collect()).collect()),
            FunctorValue::MetricTs(r, s) => FunctorValue::MetricTs(r.clone(), s.iter().map(|&x| g[x]).collect()),
            FunctorValue::Para(values) => {
                let mut out = alloc::vec![q.bottom(); target_len];
                for (x, v) in values.iter().enumerate() {
                    out[g[x]] = q.join2(&out[g[x]], v);
                }
                FunctorValue::Para(out)
            }
            FunctorValue::Dist(per) => FunctorValue::Dist(
                per.iter()
                    .map(|d| {
                        let mut mass: BTreeMap<usize, Rat> = BTreeMap::new();
                        for (&x, m) in &d.mass {
                            *mass.entry(g[x]).or_insert_with(rational::zero) += m;
                        }
                        mass.retain(|_, m| !m.is_zero());
                        Distribution { mass, deadlock: d.deadlock.clone() }
                    })
                    .collect(),
            ),
            FunctorValue::Signed(per) => FunctorValue::Signed(
                per.iter()
                    .map(|w| {
                        let mut out: BTreeMap<usize, Rat> = BTreeMap::new();
                        for (&x, m) in w {
                            *out.entry(g[x]).or_insert_with(rational::zero) += m;
                        }
                        out.retain(|_, m| !m.is_zero());
                        out
                    })
                    .collect(),
            ),
        }
    }
}

/// A finitely supported distribution over states plus a deadlock point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    pub mass: BTreeMap<usize, Rat>,
    pub deadlock: Rat,
}

impl Distribution {
    pub fn deadlock() -> Self {
        Distribution { mass: BTreeMap::new(), deadlock: rational::one() }
    }

    pub fn dirac(x: usize) -> Self {
        Distribution { mass: [(x, rational::one())].into_iter().collect(), deadlock: rational::zero() }
    }

    pub fn total(&self) -> Rat {
        self.mass.values().sum::<Rat>() + &self.deadlock
    }
}

/// An element of `F X` for one of the supported functors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunctorValue {
    /// Successor set per label.
    Lts(Vec<BTreeSet<usize>>),
    /// Observation and successor set.
    MetricTs(Rat, BTreeSet<usize>),
    /// Dense four-valued membership map.
    Para(Vec<QValue>),
    /// Distribution per label; an absent transition is the deadlock Dirac.
    Dist(Vec<Distribution>),
    /// Signed weights per label, zero entries omitted.
    Signed(Vec<BTreeMap<usize, Rat>>),
}

/// A defect in a single functor value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueIssue {
    Shape(String),
    SuccessorOutOfRange(usize),
    ForeignValue(String),
    NegativeMass { label: usize },
    MassNotOne { label: usize, total: Rat },
    WeightOutOfRange { label: usize },
    SubsetSum { label: usize, positive: Rat, negative: Rat },
    ObservationOutOfRange,
}

impl FunctorValue {
    /// Structural checks: shapes, successor ranges, masses, subset sums.
    pub fn check(&self, functor: &Functor, q: &Quantale, n: usize) -> Vec<ValueIssue> {
        let mut issues = Vec::new();
        let labels = functor.labels().len();
        let in_range = |s: &BTreeSet<usize>, issues: &mut Vec<ValueIssue>| {
            for &x in s {
                if x >= n {
                    issues.push(ValueIssue::SuccessorOutOfRange(x));
                }
            }
        };
        match (functor, self) {
            (Functor::Lts { .. }, FunctorValue::Lts(per)) => {
                if per.len() != labels {
                    issues.push(ValueIssue::Shape(alloc::format!("expected {labels} labels")));
                }
                per.iter().for_each(|s| in_range(s, &mut issues));
            }
            (Functor::MetricTs, FunctorValue::MetricTs(r, s)) => {
                if r.is_negative() || *r > rational::one() {
                    issues.push(ValueIssue::ObservationOutOfRange);
                }
                in_range(s, &mut issues);
            }
            (Functor::ParaPowerset, FunctorValue::Para(values)) => {
                if values.len() != n {
                    issues.push(ValueIssue::Shape(alloc::format!("expected {n} entries")));
                }
                for v in values {
                    if !q.contains(v) {
                        issues.push(ValueIssue::ForeignValue(alloc::format!("{v:?}")));
                    }
                }
            }
            (Functor::DistMaybe { .. }, FunctorValue::Dist(per)) => {
                if per.len() != labels {
                    issues.push(ValueIssue::Shape(alloc::format!("expected {labels} labels")));
                }
                for (label, d) in per.iter().enumerate() {
                    if d.deadlock.is_negative() || d.mass.values().any(Signed::is_negative) {
                        issues.push(ValueIssue::NegativeMass { label });
                    }
                    if d.mass.keys().any(|&x| x >= n) {
                        issues.push(ValueIssue::SuccessorOutOfRange(*d.mass.keys().last().unwrap_or(&0)));
                    }
                    let total = d.total();
                    if total != rational::one() {
                        issues.push(ValueIssue::MassNotOne { label, total });
                    }
                }
            }
            (Functor::SignedWeighted { .. }, FunctorValue::Signed(per)) => {
                if per.len() != labels {
                    issues.push(ValueIssue::Shape(alloc::format!("expected {labels} labels")));
                }
                for (label, w) in per.iter().enumerate() {
                    if w.keys().any(|&x| x >= n) {
                        issues.push(ValueIssue::SuccessorOutOfRange(*w.keys().last().unwrap_or(&0)));
                    }
                    if w.values().any(|v| v.abs() > rational::one()) {
                        issues.push(ValueIssue::WeightOutOfRange { label });
                    }
                    // the extreme subset sums are the positive and negative parts
                    let positive: Rat = w.values().filter(|v| v.is_positive()).sum();
                    let negative: Rat = w.values().filter(|v| v.is_negative()).sum();
                    if positive > rational::one() || negative < -rational::one() {
                        issues.push(ValueIssue::SubsetSum { label, positive, negative });
                    }
                }
            }
            _ => issues.push(ValueIssue::Shape(alloc::format!("value does not belong to functor {}", functor.name()))),
        }
        issues
    }
}
