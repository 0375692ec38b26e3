use std::collections::BTreeSet;

use num_traits::Signed;
use proptest::prelude::*;
use qhm_core::closure::{self, ClosureOp, ClosureOptions, PredicateSet};
use qhm_core::engine::{self, FixpointOptions, LdOptions, PartitionSource};
use qhm_core::quantale::{QValue, Quantale};
use qhm_core::random;
use qhm_core::rational::{self, Rat};
use qhm_core::systems::{self, Backend, Functor, FunctorValue};
use qhm_core::vcat::{self, VCat};
use rand::Rng;

fn finite(which: usize) -> Quantale {
    match which % 4 {
        0 => Quantale::bool2(),
        1 => Quantale::diamond4(),
        2 => Quantale::chain(4),
        _ => Quantale::product(&[Quantale::bool2(), Quantale::chain(3)]),
    }
}

fn grid_value(i: u32) -> QValue {
    QValue::Num(rational::rat(i as i64, 50))
}

fn numeric(v: &QValue) -> Rat {
    match v {
        QValue::Num(r) => r.clone(),
        other => panic!("not numeric: {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adjunction_on_finite_quantales(which in 0usize..4, a in 0usize..8, b in 0usize..8, c in 0usize..8) {
        let q = finite(which);
        let e = q.elements().unwrap();
        let (u, v, w) = (&e[a % e.len()], &e[b % e.len()], &e[c % e.len()]);
        prop_assert_eq!(q.leq(&q.tensor(u, v), w), q.leq(v, &q.hom(u, w)));
    }

    #[test]
    fn adjunction_on_unit_intervals(max in any::<bool>(), a in 0u32..=50, b in 0u32..=50, c in 0u32..=50) {
        let q = if max { Quantale::max01() } else { Quantale::luk01() };
        let (u, v, w) = (grid_value(a), grid_value(b), grid_value(c));
        prop_assert_eq!(q.leq(&q.tensor(&u, &v), &w), q.leq(&v, &q.hom(&u, &w)));
    }

    #[test]
    fn symmetric_hom_is_symmetric_and_reflexive(which in 0usize..4, a in 0usize..8, b in 0usize..8) {
        let q = finite(which);
        let e = q.elements().unwrap();
        let (u, v) = (&e[a % e.len()], &e[b % e.len()]);
        prop_assert_eq!(q.hom_s(u, v), q.hom_s(v, u));
        prop_assert!(q.leq(&q.unit(), &q.hom_s(u, u)));
    }

    #[test]
    fn luk_symmetric_hom_is_absolute_difference(a in 0u32..=50, b in 0u32..=50) {
        let q = Quantale::luk01();
        let (u, v) = (grid_value(a), grid_value(b));
        let expected = (rational::rat(a as i64, 50) - rational::rat(b as i64, 50)).abs();
        prop_assert_eq!(numeric(&q.hom_s(&u, &v)), expected);
        prop_assert!(q.leq(&q.unit(), &q.hom_s(&u, &u)));
    }

    #[test]
    fn lattice_operations_behave(which in 0usize..4, a in 0usize..8, b in 0usize..8, c in 0usize..8) {
        let q = finite(which);
        let e = q.elements().unwrap();
        let (x, y, z) = (&e[a % e.len()], &e[b % e.len()], &e[c % e.len()]);
        prop_assert_eq!(q.join2(x, y), q.join2(y, x));
        prop_assert_eq!(q.meet2(x, y), q.meet2(y, x));
        prop_assert_eq!(q.join2(&q.join2(x, y), z), q.join2(x, &q.join2(y, z)));
        prop_assert_eq!(q.meet2(&q.meet2(x, y), z), q.meet2(x, &q.meet2(y, z)));
        prop_assert_eq!(&q.join2(x, x), x);
        prop_assert_eq!(&q.meet2(x, x), x);
        prop_assert_eq!(&q.join2(x, &q.meet2(x, y)), x);
        prop_assert_eq!(&q.meet2(x, &q.join2(x, y)), x);
    }
}

fn random_setup(seed: u64, which: usize) -> (Quantale, VCat, Vec<QValue>, random::Rng8) {
    let q = finite(which);
    let pool = q.elements().unwrap();
    let mut r = random::rng(seed);
    let n = r.gen_range(1..=4);
    let x = random::random_vcat(&mut r, &q, n, &pool);
    (q, x, pool, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn initial_structures_are_vcats(seed in any::<u64>(), which in 0usize..4, count in 0usize..4) {
        let q = finite(which);
        let pool = q.elements().unwrap();
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=5);
        let preds: Vec<Vec<QValue>> = (0..count).map(|_| random::random_predicate(&mut r, n, &pool)).collect();
        let x = vcat::initial_from_predicates(&q, VCat::numbered_states(n), preds.iter().map(|p| p.as_slice()));
        prop_assert!(x.validate().is_symmetric_vcat());
        for p in &preds {
            prop_assert!(x.is_nonexpansive(p));
        }
    }

    #[test]
    fn symmetrize_is_idempotent(seed in any::<u64>(), which in 0usize..4) {
        let q = finite(which);
        let pool = q.elements().unwrap();
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=4);
        // possibly asymmetric
        let mut m: Vec<Vec<QValue>> = (0..n).map(|_| (0..n).map(|_| pool[r.gen_range(0..pool.len())].clone()).collect()).collect();
        vcat::repair_to_vcat(&q, &mut m);
        let x = VCat::new(q.clone(), VCat::numbered_states(n), m).unwrap();
        let s = x.symmetrize();
        prop_assert!(s.is_symmetric());
        prop_assert_eq!(s.symmetrize(), s);
    }

    #[test]
    fn l_closure_is_a_closure_operator(seed in any::<u64>(), which in 0usize..4, amask in 0u8..16, bmask in 0u8..16) {
        let (_, x, _, _) = random_setup(seed, which);
        let n = x.len();
        let subset = |mask: u8| (0..n).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<usize>>();
        let (a, b) = (subset(amask), subset(amask | bmask));
        let ca = x.l_closure(&a);
        prop_assert!(a.is_subset(&ca));
        prop_assert!(ca.is_subset(&x.l_closure(&b)));
        prop_assert_eq!(x.l_closure(&ca), ca);
    }

    #[test]
    fn nonexpansive_maps_are_continuous(seed in any::<u64>(), which in 0usize..4, amask in 0u8..16) {
        let (q, x, pool, mut r) = random_setup(seed, which);
        let n = x.len();
        let f = random::random_nonexpansive(&mut r, &x, &pool).unwrap();
        // V_s on the carrier of q
        let target = VCat::from_fn(q.clone(), VCat::numbered_states(pool.len()), |i, j| q.hom_s(&pool[i], &pool[j]));
        let index = |v: &QValue| pool.iter().position(|p| p == v).unwrap();
        let a: BTreeSet<usize> = (0..n).filter(|i| amask >> i & 1 == 1).collect();
        let image_of_closure: BTreeSet<usize> = x.l_closure(&a).iter().map(|&i| index(&f[i])).collect();
        let closure_of_image = target.l_closure(&a.iter().map(|&i| index(&f[i])).collect());
        prop_assert!(image_of_closure.is_subset(&closure_of_image));
    }

    #[test]
    fn closure_ops_are_lawful_and_dominated(seed in any::<u64>(), which in 0usize..2) {
        let (_, x, pool, mut r) = random_setup(seed, which);
        let o = ClosureOptions::default();
        let sample = |r: &mut random::Rng8| -> PredicateSet {
            (0..r.gen_range(0..=2)).filter_map(|_| random::random_nonexpansive(r, &x, &pool)).collect()
        };
        let (a, b) = (sample(&mut r), sample(&mut r));
        for op in ClosureOp::ALL {
            let laws = closure::check_closure_laws(op, &x, &a, &b, &o).unwrap();
            prop_assert!(laws.passed(), "{:?}: {:?}", op, laws);
            prop_assert!(closure::check_dominance(op, &x, &a, &o).unwrap());
            prop_assert_ne!(closure::check_dense_implies_initial(op, &x, &a, &o).unwrap(), Some(false));
        }
    }
}

fn functor_for(which: usize) -> (&'static str, Quantale) {
    match which % 5 {
        0 => ("lts", Quantale::diamond4()),
        1 => ("metric_ts", Quantale::luk01()),
        2 => ("para_powerset", Quantale::diamond4()),
        3 => ("dist_maybe", Quantale::luk01()),
        _ => ("signed_weighted", Quantale::luk01()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn liftings_are_natural(seed in any::<u64>(), which in 0usize..5) {
        let (name, q) = functor_for(which);
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=4);
        let m = r.gen_range(1..=3);
        let c = random::random_coalgebra(&mut r, name, &q, n).unwrap();
        let functor = c.functor().clone();
        let g: Vec<usize> = (0..n).map(|_| r.gen_range(0..m)).collect();
        let pool = q.elements_or_grid(&rational::rat(1, 4));
        let f = random::random_predicate(&mut r, m, &pool);
        let pulled: Vec<QValue> = g.iter().map(|&x| f[x].clone()).collect();
        for t in c.transitions() {
            let pushed = functor.map_value(&q, &g, m, t);
            for modality in functor.modalities() {
                let lhs = functor.apply(&q, &modality, &pulled, t).unwrap();
                let rhs = functor.apply(&q, &modality, &f, &pushed).unwrap();
                prop_assert_eq!(lhs, rhs, "{} {:?}", name, modality);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lifted_matrices_are_vcats(seed in any::<u64>(), which in 0usize..5) {
        let (name, q) = functor_for(which);
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=4);
        let c = random::random_coalgebra(&mut r, name, &q, n).unwrap();
        let pool = q.elements_or_grid(&rational::rat(1, 4));
        let base = random::random_vcat(&mut r, &q, n, &pool);
        let values: Vec<&FunctorValue> = c.transitions().iter().collect();
        let m = systems::lift_matrix(c.functor(), &base, &values, &Backend::Auto).unwrap();
        let lifted = VCat::new(q.clone(), VCat::numbered_states(n), m).unwrap();
        prop_assert!(lifted.validate().is_vcat());
    }

    #[test]
    fn lp_dominates_grid_enumeration(seed in any::<u64>()) {
        let q = Quantale::luk01();
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=3);
        let base = random::random_vcat(&mut r, &q, n, &q.elements_or_grid(&rational::rat(1, 3)));
        let functor = Functor::DistMaybe { labels: vec!["a".into()] };
        let t1 = FunctorValue::Dist(vec![random::random_distribution(&mut r, n, 6)]);
        let t2 = FunctorValue::Dist(vec![random::random_distribution(&mut r, n, 6)]);
        let step = rational::rat(1, 8);
        let lp = numeric(&systems::lifted_distance(&functor, &base, &t1, &t2, &Backend::Lp).unwrap());
        let en = numeric(&systems::lifted_distance(&functor, &base, &t1, &t2, &Backend::Enumerate { grid: step.clone() }).unwrap());
        prop_assert!(lp >= en);
        prop_assert!(&lp - &en <= step * Rat::from_integer((n as i64).into()));
    }

    #[test]
    fn iterates_descend_and_stay_vcats(seed in any::<u64>(), which in 0usize..5) {
        let (name, q) = functor_for(which);
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=4);
        let c = random::random_coalgebra(&mut r, name, &q, n).unwrap();
        let run = engine::bd_fixpoint(&c, &FixpointOptions { record_iterates: true, ..FixpointOptions::default() }).unwrap();
        for pair in run.iterates.windows(2) {
            prop_assert!(pair[1].below(&pair[0]));
            prop_assert!(pair[1].validate().is_vcat());
        }
        if q.is_finite() {
            let again = engine::bd_step(&c, &run.matrix.vcat, &Backend::Auto).unwrap();
            prop_assert_eq!(again, run.matrix.vcat.clone());
        }
    }

    #[test]
    fn formulas_are_nonexpansive_and_ld_is_antitone(seed in any::<u64>(), which in 0usize..3) {
        let q = finite(which);
        let mut r = random::rng(seed);
        let n = r.gen_range(1..=4);
        let c = if which == 1 { random::random_para(&mut r, n, 0.4) } else { random::random_lts(&mut r, &q, n, 2, 0.35) };
        let bd = engine::bd_fixpoint(&c, &FixpointOptions::default()).unwrap().matrix;
        let ld = engine::logical_distance(&c, 3, &LdOptions::default()).unwrap();
        for entry in &ld.basis {
            prop_assert!(bd.vcat.is_nonexpansive(&entry.values));
        }
        for d in 0..ld.layers.len().saturating_sub(1) {
            prop_assert!(ld.at_depth(d + 1).below(ld.at_depth(d)));
        }
        prop_assert!(ld.matrix.vcat.below(ld.at_depth(0)));
    }

    #[test]
    fn quotients_commute_with_semantics(seed in any::<u64>(), which in 0usize..5) {
        let (name, q) = functor_for(which);
        let mut r = random::rng(seed);
        let n = r.gen_range(2..=4);
        let c = random::random_coalgebra(&mut r, name, &q, n).unwrap();
        let fix = FixpointOptions::default();
        let (target, g) = engine::quotient_by(&c, PartitionSource::BdKernel, &fix).unwrap();
        prop_assert!(c.check_morphism(&target, &g).is_ok());
        let report = engine::check_morphism_invariance(&c, &target, &g, 2, &fix, &LdOptions::default()).unwrap();
        prop_assert!(report.passed(), "{:?}", report);
    }
}
