//! Small named systems used by tests, fixtures and the command line.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::quantale::{QValue, Quantale};
use crate::rational::{self, Rat};
use crate::systems::{Coalgebra, Distribution, Functor, FunctorValue};
use crate::vcat::VCat;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn label_a() -> Vec<String> {
    alloc::vec![String::from("a")]
}

/// Two probabilistic systems side by side: `r` moves to a deadlocking
/// state `b` and a looping state `c` with probability ½ each; `r2` does the
/// same with probabilities ½+ε and ½−ε. Requires `0 ≤ ε ≤ ½`.
pub fn split_pair(epsilon: &Rat) -> Coalgebra {
    let half = rational::rat(1, 2);
    let q = Quantale::luk01();
    let states = names(&["r", "b", "c", "r2", "b2", "c2"]);
    let split = |hi: usize, lo: usize, p: Rat| {
        let mut mass = BTreeMap::new();
        mass.insert(hi, p.clone());
        mass.insert(lo, rational::one() - p);
        Distribution { mass, deadlock: rational::zero() }
    };
    let transitions = alloc::vec![
        FunctorValue::Dist(alloc::vec![split(1, 2, half.clone())]),
        FunctorValue::Dist(alloc::vec![Distribution::deadlock()]),
        FunctorValue::Dist(alloc::vec![Distribution::dirac(2)]),
        FunctorValue::Dist(alloc::vec![split(4, 5, half + epsilon)]),
        FunctorValue::Dist(alloc::vec![Distribution::deadlock()]),
        FunctorValue::Dist(alloc::vec![Distribution::dirac(5)]),
    ];
    Coalgebra::new(VCat::discrete(q, states), Functor::DistMaybe { labels: label_a() }, transitions)
        .expect("well-formed instance")
}

/// A labelled transition system with two bisimilar branches and one that
/// deadlocks early.
pub fn small_lts() -> Coalgebra {
    let q = Quantale::bool2();
    let states = names(&["p", "p1", "q", "q1", "q2", "d"]);
    let set = |xs: &[usize]| xs.iter().copied().collect::<BTreeSet<usize>>();
    let transitions = alloc::vec![
        FunctorValue::Lts(alloc::vec![set(&[1])]),
        FunctorValue::Lts(alloc::vec![set(&[1])]),
        FunctorValue::Lts(alloc::vec![set(&[3, 4])]),
        FunctorValue::Lts(alloc::vec![set(&[4])]),
        FunctorValue::Lts(alloc::vec![set(&[3])]),
        FunctorValue::Lts(alloc::vec![set(&[])]),
    ];
    Coalgebra::new(VCat::discrete(q, states), Functor::Lts { labels: label_a() }, transitions).expect("well-formed instance")
}

/// A system with numeric observations and successor sets over `q`, which
/// must be `luk01` or `max01`.
pub fn metric_example(q: Quantale) -> Coalgebra {
    let states = names(&["x", "y", "z", "w"]);
    let set = |xs: &[usize]| xs.iter().copied().collect::<BTreeSet<usize>>();
    let transitions = alloc::vec![
        FunctorValue::MetricTs(rational::rat(1, 2), set(&[1])),
        FunctorValue::MetricTs(rational::rat(1, 4), set(&[])),
        FunctorValue::MetricTs(rational::rat(1, 2), set(&[3])),
        FunctorValue::MetricTs(rational::rat(3, 8), set(&[])),
    ];
    Coalgebra::new(VCat::discrete(q, states), Functor::MetricTs, transitions).expect("well-formed instance")
}

/// Two states whose four-valued successor maps differ only in how much
/// evidence they carry for a shared successor.
pub fn para_example() -> Coalgebra {
    let q = Quantale::diamond4();
    let states = names(&["u", "v", "w"]);
    let top = q.top();
    let bot = q.bottom();
    let b = q.parse_value("B").expect("diamond4 element");
    let transitions = alloc::vec![
        FunctorValue::Para(alloc::vec![bot.clone(), bot.clone(), top]),
        FunctorValue::Para(alloc::vec![bot.clone(), bot.clone(), b]),
        FunctorValue::Para(alloc::vec![bot.clone(), bot.clone(), bot]),
    ];
    Coalgebra::new(VCat::discrete(q, states), Functor::ParaPowerset, transitions).expect("well-formed instance")
}

/// Signed weights: `s` sends ½ to `x` and −¼ to `y`; `t` sends ¼ to `x`.
pub fn signed_example() -> Coalgebra {
    let q = Quantale::luk01();
    let states = names(&["s", "t", "x", "y"]);
    let weights = |pairs: &[(usize, Rat)]| pairs.iter().cloned().collect::<BTreeMap<usize, Rat>>();
    let transitions = alloc::vec![
        FunctorValue::Signed(alloc::vec![weights(&[(2, rational::rat(1, 2)), (3, rational::rat(-1, 4))])]),
        FunctorValue::Signed(alloc::vec![weights(&[(2, rational::rat(1, 4))])]),
        FunctorValue::Signed(alloc::vec![weights(&[])]),
        FunctorValue::Signed(alloc::vec![weights(&[(3, rational::rat(1, 2))])]),
    ];
    Coalgebra::new(VCat::discrete(q, states), Functor::SignedWeighted { labels: label_a() }, transitions)
        .expect("well-formed instance")
}

/// Numeric value of a unit-interval element.
pub fn num(v: &QValue) -> Rat {
    match v {
        QValue::Num(r) => r.clone(),
        _ => panic!("not a numeric value: {v:?}"),
    }
}
