mod common;

use std::collections::{HashMap, HashSet};

use realstab::counting::{enumerate_normal_forms, StageTable};
use realstab::normal_form::{
    all_x_circuits, all_z_circuits, build_stage, build_x_circuit, build_z_circuit, normalize, Stage,
};
use realstab::rewrite::{normalize_by_rewriting, RuleDb};
use realstab::{Circuit, Gate, NormalForm, PauliLetter, PauliOperator, Tableau};

fn tableau_of(n: usize, gates: Vec<Gate>) -> Tableau {
    Tableau::from_circuit(&Circuit::new(n, gates).unwrap())
}

fn hermitian_nonscalar(n: usize) -> Vec<PauliOperator> {
    PauliOperator::all(n)
        .filter(|p| p.squares_to_identity() && !p.is_scalar())
        .collect()
}

/// Each Z-circuit is determined by the word it sends to +Z⊗I⊗…⊗I, and every
/// Hermitian non-scalar word is sent there by exactly one of them.
#[test]
fn z_circuits_are_unique() {
    for n in 1..=3 {
        let target = PauliOperator::single(n, 0, PauliLetter::Z);
        let words: HashSet<PauliOperator> = hermitian_nonscalar(n).into_iter().collect();
        let mut by_source = HashMap::new();
        for z in all_z_circuits(n) {
            let source = tableau_of(n, z.gates()).preimage(&target);
            assert!(words.contains(&source), "{z:?} sends {source} to Z");
            assert!(
                by_source.insert(source.clone(), z.clone()).is_none(),
                "two Z-circuits for {source}"
            );
        }
        assert_eq!(by_source.len(), words.len());
        for p in &words {
            assert_eq!(&build_z_circuit(p).unwrap(), &by_source[p]);
        }
    }
}

/// X-circuits move Z from the top wire to the bottom one.
#[test]
fn x_circuits_move_z_down() {
    for n in 1..=3 {
        let top = PauliOperator::single(n, 0, PauliLetter::Z);
        let bottom = PauliOperator::single(n, n - 1, PauliLetter::Z);
        for x in all_x_circuits(n) {
            assert_eq!(
                tableau_of(n, x.gates()).apply(&top).unwrap(),
                bottom,
                "{x:?}"
            );
        }
    }
}

/// Each word anticommuting with Z on top is sent to +I⊗…⊗X by exactly one X-circuit.
#[test]
fn x_circuits_are_unique() {
    for n in 1..=3 {
        let target = PauliOperator::single(n, n - 1, PauliLetter::X);
        let top = PauliOperator::single(n, 0, PauliLetter::Z);
        let words: HashSet<PauliOperator> = hermitian_nonscalar(n)
            .into_iter()
            .filter(|q| !q.commutes(&top).unwrap())
            .collect();
        let mut by_source = HashMap::new();
        for x in all_x_circuits(n) {
            let source = tableau_of(n, x.gates()).preimage(&target);
            assert!(words.contains(&source), "{x:?} sends {source} to X");
            assert!(by_source.insert(source.clone(), x.clone()).is_none());
        }
        assert_eq!(by_source.len(), words.len());
        for q in &words {
            assert_eq!(&build_x_circuit(q).unwrap(), &by_source[q]);
        }
    }
}

/// Each anticommuting pair (P, Q) is sent to (Z, X) on the bottom wire by exactly one stage.
#[test]
fn stages_are_unique() {
    for n in 1..=3 {
        let z = PauliOperator::single(n, n - 1, PauliLetter::Z);
        let x = PauliOperator::single(n, n - 1, PauliLetter::X);
        let words = hermitian_nonscalar(n);
        let mut pairs = HashSet::new();
        for p in &words {
            for q in &words {
                if !p.commutes(q).unwrap() {
                    pairs.insert((p.clone(), q.clone()));
                }
            }
        }
        let mut by_source: HashMap<(PauliOperator, PauliOperator), Stage> = HashMap::new();
        for zc in all_z_circuits(n) {
            for xc in all_x_circuits(n) {
                let stage = Stage {
                    x: xc,
                    z: zc.clone(),
                };
                let t = tableau_of(n, stage.gates());
                let key = (t.preimage(&z), t.preimage(&x));
                assert!(pairs.contains(&key));
                assert!(by_source.insert(key, stage).is_none());
            }
        }
        assert_eq!(by_source.len(), pairs.len());
        for (p, q) in pairs.iter().step_by(7) {
            assert_eq!(
                build_stage(p, q).unwrap(),
                by_source[&(p.clone(), q.clone())]
            );
        }
    }
}

fn check_fixed_point(nf: &NormalForm, rewrite: bool) {
    let c = nf.to_circuit();
    assert_eq!(&normalize(&c).unwrap(), nf);
    assert_eq!(NormalForm::from_circuit(&c).as_ref(), Some(nf));
    if rewrite {
        let out = normalize_by_rewriting(&c, RuleDb::typed()).unwrap();
        assert_eq!(&out.normal_form, nf);
    }
}

#[test]
fn normal_forms_are_fixed_points() {
    for n in 0..=2 {
        for nf in enumerate_normal_forms(n) {
            check_fixed_point(&nf, true);
        }
    }
    let table = StageTable::new(3);
    for i in (0..table.len()).step_by(20_011) {
        check_fixed_point(&table.get(i), true);
    }
}

#[test]
fn json_is_canonical() {
    let mut rng = common::rng(5);
    for n in 1..=3 {
        let nf = normalize(&common::random_circuit(&mut rng, n, 20)).unwrap();
        let text = serde_json::to_string(&nf).unwrap();
        let back: NormalForm = serde_json::from_str(&text).unwrap();
        assert_eq!(back, nf);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            serde_json::to_string(&value).unwrap(),
            text,
            "keys are sorted"
        );
    }
}
