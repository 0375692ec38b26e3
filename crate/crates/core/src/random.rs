//! Seeded generators for quantales, V-categories and coalgebras.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quantale::{FiniteTable, QValue, Quantale};
use crate::rational::{self, Rat};
use crate::systems::{Coalgebra, Distribution, Functor, FunctorValue};
use crate::vcat::{self, VCat};

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent per-trial seeds derived from one master seed.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut r = rng(seed);
    (0..trials).map(|_| r.gen()).collect()
}

pub fn labels(count: usize) -> Vec<String> {
    const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
    (0..count).map(|i| NAMES.get(i).map_or_else(|| alloc::format!("l{i}"), |s| s.to_string())).collect()
}

/// A random finite quantale built from a known-valid family, with its
/// elements relabelled in random order. Sizes stay at or below 8.
pub fn random_quantale_table(r: &mut Rng8) -> FiniteTable {
    let (join, tensor): (Vec<Vec<usize>>, Vec<Vec<usize>>) = match r.gen_range(0..4) {
        0 => {
            // chain with min
            let m = r.gen_range(2..=6);
            chain_tables(m, |i, j, _| i.min(j))
        }
        1 => {
            // finite MV-chain: truncated addition
            let m = r.gen_range(2..=6);
            chain_tables(m, |i, j, m| (i + j).saturating_sub(m - 1))
        }
        2 => {
            // Boolean algebra on subsets of a 2- or 3-element set
            let bits = r.gen_range(2..=3);
            let n = 1usize << bits;
            let join = (0..n).map(|i| (0..n).map(|j| i | j).collect()).collect();
            let tensor = (0..n).map(|i| (0..n).map(|j| i & j).collect()).collect();
            (join, tensor)
        }
        _ => {
            // product of a 2-chain with a small chain, both with min
            let m = r.gen_range(2..=4);
            let n = 2 * m;
            let enc = |a: usize, b: usize| a * m + b;
            let mut join = alloc::vec![alloc::vec![0; n]; n];
            let mut tensor = alloc::vec![alloc::vec![0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let (a1, b1, a2, b2) = (i / m, i % m, j / m, j % m);
                    join[i][j] = enc(a1.max(a2), b1.max(b2));
                    tensor[i][j] = enc(a1.min(a2), b1.min(b2));
                }
            }
            (join, tensor)
        }
    };
    let n = join.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(r);
    let mut pj = alloc::vec![alloc::vec![0u16; n]; n];
    let mut pt = alloc::vec![alloc::vec![0u16; n]; n];
    for i in 0..n {
        for j in 0..n {
            pj[perm[i]][perm[j]] = perm[join[i][j]] as u16;
            pt[perm[i]][perm[j]] = perm[tensor[i][j]] as u16;
        }
    }
    FiniteTable { names: (0..n).map(|i| alloc::format!("e{i}")).collect(), join: pj, tensor: pt }
}

fn chain_tables(m: usize, tensor: impl Fn(usize, usize, usize) -> usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let join = (0..m).map(|i| (0..m).map(|j| i.max(j)).collect()).collect();
    let t = (0..m).map(|i| (0..m).map(|j| tensor(i, j, m)).collect()).collect();
    (join, t)
}

/// Candidate values for random structures: the carrier for finite
/// quantales, the grid otherwise.
pub fn value_pool(q: &Quantale, grid: &Rat) -> Vec<QValue> {
    q.elements().unwrap_or_else(|| q.elements_or_grid(grid))
}

/// A symmetric matrix sampled from `values`, repaired into a V-category.
pub fn random_vcat(r: &mut Rng8, q: &Quantale, n: usize, values: &[QValue]) -> VCat {
    let mut matrix = alloc::vec![alloc::vec![q.top(); n]; n];
    for x in 0..n {
        for y in x + 1..n {
            let v = values.choose(r).cloned().unwrap_or_else(|| q.bottom());
            matrix[x][y] = v.clone();
            matrix[y][x] = v;
        }
    }
    vcat::repair_to_vcat(q, &mut matrix);
    VCat::new(q.clone(), VCat::numbered_states(n), matrix).expect("repaired matrix has carrier values")
}

pub fn random_predicate(r: &mut Rng8, n: usize, values: &[QValue]) -> Vec<QValue> {
    (0..n).map(|_| values.choose(r).cloned().expect("nonempty value pool")).collect()
}

/// A uniformly chosen nonexpansive map into `values`, if any exists.
pub fn random_nonexpansive(r: &mut Rng8, x: &VCat, values: &[QValue]) -> Option<Vec<QValue>> {
    let all = x.nonexpansive_maps(values);
    all.choose(r).cloned()
}

/// A random labelled transition system; each edge is present with
/// probability `density`.
pub fn random_lts(r: &mut Rng8, q: &Quantale, n: usize, label_count: usize, density: f64) -> Coalgebra {
    let transitions = (0..n)
        .map(|_| {
            FunctorValue::Lts(
                (0..label_count).map(|_| (0..n).filter(|_| r.gen_bool(density)).collect::<BTreeSet<usize>>()).collect(),
            )
        })
        .collect();
    Coalgebra::new(VCat::discrete(q.clone(), VCat::numbered_states(n)), Functor::Lts { labels: labels(label_count) }, transitions)
        .expect("lts accepts any quantale")
}

/// Observations on the `1/denominator` grid and random successor sets.
pub fn random_metric_ts(r: &mut Rng8, q: &Quantale, n: usize, denominator: i64, density: f64) -> Coalgebra {
    let transitions = (0..n)
        .map(|_| {
            let obs = rational::rat(r.gen_range(0..=denominator), denominator);
            FunctorValue::MetricTs(obs, (0..n).filter(|_| r.gen_bool(density)).collect())
        })
        .collect();
    Coalgebra::new(VCat::discrete(q.clone(), VCat::numbered_states(n)), Functor::MetricTs, transitions)
        .expect("metric_ts over a unit interval")
}

/// Four-valued successor maps, each entry nonzero with probability
/// `density`.
pub fn random_para(r: &mut Rng8, n: usize, density: f64) -> Coalgebra {
    let q = Quantale::diamond4();
    let values = q.elements().expect("finite");
    let bottom = q.bottom();
    let transitions = (0..n)
        .map(|_| {
            FunctorValue::Para(
                (0..n)
                    .map(|_| if r.gen_bool(density) { values.choose(r).cloned().expect("nonempty") } else { bottom.clone() })
                    .collect(),
            )
        })
        .collect();
    Coalgebra::new(VCat::discrete(q, VCat::numbered_states(n)), Functor::ParaPowerset, transitions).expect("para over diamond4")
}

/// A distribution with masses on the `1/denominator` grid over at most
/// three targets; some draws send mass to deadlock.
pub fn random_distribution(r: &mut Rng8, n: usize, denominator: i64) -> Distribution {
    if r.gen_bool(0.15) {
        return Distribution::deadlock();
    }
    let mut units: BTreeMap<Option<usize>, i64> = BTreeMap::new();
    let targets: Vec<Option<usize>> = (0..r.gen_range(1..=3))
        .map(|_| if r.gen_bool(0.2) || n == 0 { None } else { Some(r.gen_range(0..n)) })
        .collect();
    for _ in 0..denominator {
        *units.entry(*targets.choose(r).expect("nonempty")).or_insert(0) += 1;
    }
    let mut mass = BTreeMap::new();
    let mut deadlock = rational::zero();
    for (t, u) in units {
        let m = rational::rat(u, denominator);
        match t {
            Some(x) => {
                mass.insert(x, m);
            }
            None => deadlock = m,
        }
    }
    Distribution { mass, deadlock }
}

pub fn random_dist(r: &mut Rng8, n: usize, label_count: usize, denominator: i64) -> Coalgebra {
    let transitions =
        (0..n).map(|_| FunctorValue::Dist((0..label_count).map(|_| random_distribution(r, n, denominator)).collect())).collect();
    Coalgebra::new(
        VCat::discrete(Quantale::luk01(), VCat::numbered_states(n)),
        Functor::DistMaybe { labels: labels(label_count) },
        transitions,
    )
    .expect("dist over luk01")
}

/// Signed weights on the `1/4` grid whose positive and negative parts
/// each sum to at most one.
pub fn random_signed_value(r: &mut Rng8, n: usize) -> BTreeMap<usize, Rat> {
    let mut out = BTreeMap::new();
    let (mut pos, mut neg) = (0i64, 0i64);
    for x in 0..n {
        if !r.gen_bool(0.5) {
            continue;
        }
        let w: i64 = r.gen_range(-2..=2);
        if w > 0 && pos + w <= 4 {
            pos += w;
            out.insert(x, rational::rat(w, 4));
        } else if w < 0 && neg - w <= 4 {
            neg -= w;
            out.insert(x, rational::rat(w, 4));
        }
    }
    out
}

pub fn random_signed(r: &mut Rng8, n: usize, label_count: usize) -> Coalgebra {
    let transitions =
        (0..n).map(|_| FunctorValue::Signed((0..label_count).map(|_| random_signed_value(r, n)).collect())).collect();
    Coalgebra::new(
        VCat::discrete(Quantale::luk01(), VCat::numbered_states(n)),
        Functor::SignedWeighted { labels: labels(label_count) },
        transitions,
    )
    .expect("signed over luk01")
}

/// A random coalgebra for the named functor.
pub fn random_coalgebra(r: &mut Rng8, functor: &str, q: &Quantale, n: usize) -> Option<Coalgebra> {
    Some(match functor {
        "lts" => random_lts(r, q, n, 2, 0.3),
        "metric_ts" => random_metric_ts(r, q, n, 8, 0.4),
        "para_powerset" => random_para(r, n, 0.4),
        "dist_maybe" => random_dist(r, n, 1, 4),
        "signed_weighted" => random_signed(r, n, 1),
        _ => return None,
    })
}
