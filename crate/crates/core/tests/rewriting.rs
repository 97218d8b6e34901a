mod common;

use realstab::exact::circuit_matrix;
use realstab::normal_form::normalize;
use realstab::rewrite::{
    derive_typed_rules, format_rules, normalize_by_rewriting, RelationSet, RuleDb,
    DEFAULT_DIRTY_BOUND,
};
use realstab::Circuit;

#[test]
fn bundled_typed_rules_match_derivation() {
    let derived = derive_typed_rules(DEFAULT_DIRTY_BOUND).unwrap();
    assert_eq!(derived, RelationSet::Typed.rules());
    let body: String = RelationSet::Typed
        .text()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(format_rules(&derived), body);
}

#[test]
fn rewriting_agrees_with_synthesis() {
    let db = RuleDb::typed();
    let mut rng = common::rng(7);
    for n in 1..=3 {
        for len in [0, 1, 3, 8, 20] {
            for _ in 0..40 {
                let c = common::random_circuit(&mut rng, n, len);
                let out = normalize_by_rewriting(&c, db)
                    .unwrap_or_else(|e| panic!("{}\n{e}", c.to_text()));
                assert_eq!(out.normal_form, normalize(&c).unwrap(), "{}", c.to_text());
                assert_eq!(
                    circuit_matrix(&out.normal_form.to_circuit()).unwrap(),
                    circuit_matrix(&c).unwrap()
                );
            }
        }
    }
}

#[test]
fn rewriting_wider_circuits() {
    let db = RuleDb::typed();
    let mut rng = common::rng(11);
    for (n, len) in [(4, 20), (5, 8)] {
        for _ in 0..6 {
            let c = common::random_circuit(&mut rng, n, len);
            let out = normalize_by_rewriting(&c, db).unwrap();
            assert_eq!(out.normal_form, normalize(&c).unwrap());
        }
    }
}

#[test]
fn trace_measures_strictly_decrease() {
    let db = RuleDb::typed();
    let c: Circuit = "qubits 3\nH 0\nCZ 0 2\nX 1\nCXZ 1 2\nMINUS1\nZ 2\n"
        .parse()
        .unwrap();
    let out = normalize_by_rewriting(&c, db).unwrap();
    assert!(!out.trace.is_empty());
    for w in out.trace.windows(2) {
        assert!(w[1].measure < w[0].measure);
    }
    assert!(out.trace.last().unwrap().measure.0.iter().all(|&s| s == 0));
}

#[test]
fn empty_and_scalar_circuits() {
    let db = RuleDb::typed();
    for text in [
        "qubits 0\n",
        "qubits 0\nMINUS1\n",
        "qubits 2\n",
        "qubits 2\nMINUS1\nMINUS1\n",
    ] {
        let c: Circuit = text.parse().unwrap();
        assert_eq!(
            normalize_by_rewriting(&c, db).unwrap().normal_form,
            normalize(&c).unwrap()
        );
    }
}
