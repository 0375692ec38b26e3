use proptest::prelude::*;
use qhm::format::{self, CoalgebraDoc, QuantaleDoc, VCatDoc};
use qhm_core::instances;
use qhm_core::quantale::Quantale;
use qhm_core::random;
use qhm_core::rational;
use qhm_core::systems::Coalgebra;

fn roundtrip(c: &Coalgebra) -> (Coalgebra, String) {
    let text = format::to_json(&format::coalgebra_to_doc(c)).unwrap();
    let doc: CoalgebraDoc = serde_json::from_str(&text).unwrap();
    let back = format::coalgebra_from_doc(&doc).unwrap();
    (back, text)
}

#[test]
fn named_instances_roundtrip() {
    for c in [
        instances::split_pair(&rational::rat(1, 10)),
        instances::small_lts(),
        instances::metric_example(Quantale::max01()),
        instances::para_example(),
        instances::signed_example(),
    ] {
        let (back, text) = roundtrip(&c);
        assert_eq!(back, c);
        assert_eq!(roundtrip(&back).1, text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_coalgebras_roundtrip(seed in any::<u64>(), n in 1usize..7, which in 0usize..5) {
        let functor = ["lts", "metric_ts", "para_powerset", "dist_maybe", "signed_weighted"][which];
        let q = match functor {
            "lts" => Quantale::diamond4(),
            "para_powerset" => Quantale::diamond4(),
            _ => Quantale::luk01(),
        };
        let c = random::random_coalgebra(&mut random::rng(seed), functor, &q, n).unwrap();
        let (back, text) = roundtrip(&c);
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(roundtrip(&back).1, text);
    }

    #[test]
    fn rationals_roundtrip_as_text(p in -1000i64..1000, q in 1i64..1000) {
        let r = rational::rat(p, q);
        let text = rational::format_rat(&r);
        prop_assert!(!text.contains('.'));
        prop_assert_eq!(format::parse_rat_text(&text).unwrap(), r);
    }
}

#[test]
fn rationals_are_strings_in_documents() {
    let text = format::to_json(&format::coalgebra_to_doc(&instances::split_pair(&rational::rat(1, 4)))).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["transitions"]["r2"]["a"]["b2"], "3/4");
    assert_eq!(v["transitions"]["b"]["a"]["deadlock"], "1");
}

#[test]
fn quantale_names_resolve() {
    for (name, size) in [("bool2", Some(2)), ("diamond4", Some(4)), ("chain5", Some(5)), ("bool2*chain3", Some(6)), ("luk01", None)] {
        let q = format::quantale_from_name(name).unwrap();
        assert_eq!(q.cardinality(), size, "{name}");
        let doc = format::doc_from_quantale(&q);
        let back = format::quantale_from_doc(&doc).unwrap();
        assert_eq!(back.kind(), q.kind());
        assert_eq!(back.cardinality(), q.cardinality());
    }
    assert!(format::quantale_from_name("nonsense").is_err());
}

#[test]
fn invalid_table_is_rejected_unless_unchecked() {
    let doc: QuantaleDoc = serde_json::from_str(
        r#"{"kind": "table", "table": {"elements": ["lo", "hi"],
            "join": [["lo", "hi"], ["hi", "hi"]],
            "tensor": [["lo", "hi"], ["lo", "hi"]]}}"#,
    )
    .unwrap();
    assert!(format::quantale_from_doc(&doc).is_err());
    let q = format::quantale_from_doc_unchecked(&doc).unwrap();
    assert!(!q.validate(None).all_passed());
}

#[test]
fn vcat_documents_are_checked() {
    let good: VCatDoc = serde_json::from_str(
        r#"{"quantale": {"kind": "luk01"}, "states": ["x", "y"], "matrix": [["0", "1/3"], ["1/3", "0"]]}"#,
    )
    .unwrap();
    let v = format::vcat_from_doc(&good).unwrap();
    assert_eq!(format::vcat_to_doc(&v), good);
    let off_carrier: VCatDoc =
        serde_json::from_str(r#"{"quantale": {"kind": "luk01"}, "states": ["x"], "matrix": [["2"]]}"#).unwrap();
    assert!(format::vcat_from_doc(&off_carrier).is_err());
}

#[test]
fn malformed_coalgebras_fail_to_parse() {
    let cases = [
        r#"{"quantale": {"kind": "bool2"}, "functor": "lts", "states": ["p"], "transitions": {"q": {}}}"#,
        r#"{"quantale": {"kind": "bool2"}, "functor": "lts", "states": ["p", "p"], "transitions": {}}"#,
        r#"{"quantale": {"kind": "bool2"}, "functor": "lts", "states": ["p"], "transitions": {"p": {"a": ["z"]}}}"#,
        r#"{"quantale": {"kind": "luk01"}, "functor": "dist_maybe", "states": ["p"], "transitions": {"p": {"a": {"p": 0.5}}}}"#,
        r#"{"quantale": {"kind": "bool2"}, "functor": "warp", "states": ["p"], "transitions": {}}"#,
    ];
    for text in cases {
        let doc: CoalgebraDoc = serde_json::from_str(text).unwrap();
        assert!(format::coalgebra_from_doc(&doc).is_err(), "{text}");
    }
}

#[test]
fn csv_quotes_tuple_values() {
    let q = format::quantale_from_name("luk01*luk01").unwrap();
    let v = qhm_core::vcat::VCat::discrete(q.clone(), vec!["x".into(), "y".into()]);
    let csv = format::matrix_csv(&q, &v);
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with("x,"));
    assert!(first.contains('"'), "{csv}");
}
