use qhm_core::engine::*;
use qhm_core::instances::{self, num};
use qhm_core::quantale::Quantale;
use qhm_core::rational::rat;

#[test]
fn split_pair_bd_and_formula() {
    for eps in [rat(1, 10), rat(1, 4)] {
        let c = instances::split_pair(&eps);
        let bd = bd_fixpoint(&c, &FixpointOptions::default()).unwrap().matrix;
        assert_eq!(num(bd.get(0, 3)), eps);
        let (f, gap) = distinguishing_formula(&c, 0, 3, 2, &LdOptions::default()).unwrap();
        assert_eq!(num(&gap), eps);
        assert_eq!(f.render(c.quantale()), "(m exp a (m exp a (top)))");
        let v = eval_formula(&f, &c).unwrap();
        assert_eq!(num(&v[0]), rat(1, 2));
        assert_eq!(num(&v[3]), rat(1, 2) + &eps);
    }
}

#[test]
fn small_lts_matches_refinement() {
    let c = instances::small_lts();
    let classes = partition_refinement(&c).unwrap();
    let bd = bd_fixpoint(&c, &FixpointOptions::default()).unwrap().matrix;
    assert_eq!(kernel_classes(&bd.vcat), classes);
    let ld = logical_distance(&c, c.len(), &LdOptions::default()).unwrap();
    assert_eq!(ld.matrix.vcat, bd.vcat);
}

#[test]
fn adequacy_on_examples() {
    let fix = FixpointOptions::default();
    let ld = LdOptions::default();
    for c in [
        instances::split_pair(&rat(1, 10)),
        instances::small_lts(),
        instances::metric_example(Quantale::luk01()),
        instances::metric_example(Quantale::max01()),
        instances::para_example(),
        instances::signed_example(),
    ] {
        let report = check_adequacy(&c, 3, &fix, &ld).unwrap();
        assert!(report.passed(), "{:?}", report.violations.first());
        let e = check_expressivity(&c, &[0, 1, 2, 3], &fix, &ld).unwrap();
        assert!(e.monotone);
        eprintln!("{} {:?}", c.functor().name(), e.points);
    }
}
