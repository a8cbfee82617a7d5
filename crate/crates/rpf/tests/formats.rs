use std::path::Path;

use proptest::prelude::*;
use rpf::output::{fmt_f64, to_json, Table};
use rpf::schema::{parse, KeyFile, MarkovFile, ProblemFile, TimeFnSpec};

fn data(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).unwrap()
}

#[test]
fn input_documents_round_trip_and_build() {
    for name in ["gasket.json", "key_nonlattice.json", "golden_mc.json", "counting.json"] {
        let pf: ProblemFile = parse(&data(name)).unwrap();
        let again: ProblemFile = parse(&to_json(&pf).unwrap()).unwrap();
        assert_eq!(again, pf, "{name}");
        pf.load().unwrap().problem().unwrap();
    }
    let k: KeyFile = parse(&data("key_lattice.json")).unwrap();
    assert_eq!(parse::<KeyFile>(&to_json(&k).unwrap()).unwrap(), k);
    k.build().unwrap();
    let m: MarkovFile = parse(&data("markov.json")).unwrap();
    assert_eq!(parse::<MarkovFile>(&to_json(&m).unwrap()).unwrap(), m);
    m.build().unwrap();
}

#[test]
fn file_problems_match_library_problems() {
    use rpf_core::geometry::SelfSimilarSystem;
    let from_file = parse::<ProblemFile>(&data("gasket.json")).unwrap().load().unwrap().problem().unwrap();
    let lib = SelfSimilarSystem::gasket().problem().unwrap();
    for t in [-1.0, 0.5, 3.0, 7.5] {
        let a = from_file.eval_n(t, 1e-12).unwrap().value;
        let b = lib.eval_n(t, 1e-12).unwrap().value;
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn time_profiles() {
    let f: TimeFnSpec = parse(
        r#"{"shape": {"pieces": [{"from": null, "to": 0.0, "terms": [{"c": 2.0}]},
                                 {"from": 0.0, "terms": [{"c": 1.0, "p": 1, "q": -1.0}]}]},
            "upper_tail": {"exp": {"c": 1.0, "rate": -0.5, "from": 2.0}}}"#,
    )
    .unwrap();
    let g = f.build().unwrap();
    assert_eq!(g.eval(-3.0), 2.0);
    assert!((g.eval(2.0) - 2.0 * (-2f64).exp()).abs() < 1e-15);
    let grid: TimeFnSpec = parse(r#"{"shape": {"grid": {"t0": 0.0, "step": 0.5, "values": [0.0, 1.0, 0.0]}}}"#).unwrap();
    assert!((grid.build().unwrap().eval(0.25) - 0.5).abs() < 1e-15);
    assert!(parse::<TimeFnSpec>(r#"{"shape": {"builtin": "koch"}}"#).unwrap().build().is_err());
}

proptest! {
    #[test]
    fn floats_survive_json_and_csv(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        let j = to_json(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
        let mut t = Table::new(&["x"]);
        t.push(vec![x]);
        let back = Table::from_csv(&t.to_csv().unwrap()).unwrap();
        prop_assert_eq!(back.rows[0][0].to_bits(), x.to_bits());
    }

    #[test]
    fn seventeen_significant_digits(x in -1e300f64..1e300) {
        let s = fmt_f64(x);
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
        prop_assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
    }
}
