use std::collections::BTreeSet;

use realstab::rewrite::{parse_rules, verify_rules, RelationSet, RewriteRule};

const TRANSCRIBED: &str = include_str!("data/transcribed_typed.rules");

#[test]
fn reduced_relations_hold() {
    let rules = RelationSet::Reduced.rules();
    let report = verify_rules(&rules);
    assert_eq!((report.verified, report.total), (16, 16));
}

#[test]
fn alternative_relations_hold() {
    let rules = RelationSet::Alternative.rules();
    let report = verify_rules(&rules);
    assert_eq!((report.verified, report.total), (19, 19));
}

#[test]
fn typed_database_holds() {
    let rules = RelationSet::Typed.rules();
    let report = verify_rules(&rules);
    assert_eq!((report.verified, report.total), (139, 139));
    let keys: BTreeSet<_> = rules
        .iter()
        .map(|r| (r.colors.clone(), r.lhs.clone()))
        .collect();
    assert_eq!(keys.len(), 139, "left-hand sides are distinct");
}

#[test]
fn rule_files_round_trip() {
    for set in [
        RelationSet::Typed,
        RelationSet::Reduced,
        RelationSet::Alternative,
    ] {
        for r in set.rules() {
            assert_eq!(r.to_string().parse::<RewriteRule>().unwrap(), r);
        }
    }
}

#[test]
fn unsound_rules_are_reported() {
    let mut rules = RelationSet::Reduced.rules();
    rules[3].rhs_sign = -rules[3].rhs_sign;
    let report = verify_rules(&rules);
    assert_eq!(report.verified, 15);
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].0, rules[3]);
}

fn find<'a>(rules: &'a [RewriteRule], r: &RewriteRule) -> &'a RewriteRule {
    rules
        .iter()
        .find(|d| d.colors == r.colors && d.lhs == r.lhs)
        .unwrap_or_else(|| panic!("no derived rule for {r}"))
}

fn clean_part(r: &RewriteRule) -> Vec<realstab::Gate> {
    r.rhs
        .iter()
        .filter(|g| g.generator().is_some())
        .copied()
        .collect()
}

/// The printed typed relations, gate for gate, against the derived database.
#[test]
fn transcription_cross_check() {
    let printed = parse_rules(TRANSCRIBED).unwrap();
    let derived = RelationSet::Typed.rules();
    assert_eq!(printed.len(), 139);

    let unsound: Vec<String> = printed
        .iter()
        .filter(|r| !r.is_sound())
        .map(|r| r.to_string())
        .collect();
    let expected_unsound = [
        "[family1] @colors P; H 0; A3 0 -> A2 0; H 0",
        "[family1] @colors PP; CZ 0 1; A3 1; B7 0 -> A3 1; B5 0; H 1; CXZ 0 1; H 1",
        "[family1] @colors PD; H 1; B6 0 -> B6 0; CXZ 0 1; H 1; CXZ 0 1; X 0; Z 1",
        "[family1] @colors PD; H 1; B7 0 -> B7 0; CXZ 0 1; H 1; CXZ 0 1; X 0; Z 1",
        "[family1] @colors PD; H 1; B8 0 -> B8 0; CXZ 0 1; H 1; CXZ 0 1; X 0; Z 1",
        "[family2] @colors PS; Z 0; B2 0 -> B2 0; X 0",
        "[family2] @colors PD; Z 0; B6 0 -> B6 0; X 0",
        "[family2] @colors S; X 0; C1 0 -> C1 0; Z 0",
        "[family2] @colors S; X 0; C2 0 -> C2 0; Z 0",
        "[family3] @colors PDP; CXZ 1 2; B5 0 -> B5 0; H 2; CZ 1 2; H 1; H 2; CZ 1 2; H 1; CXZ 0 1; H 1; CZ 1 2; H 1; H 2; CZ 1 2; H 2; Z 2",
        "[family3] @colors PDP; CXZ 1 2; B8 0 -> B8 0; H 2; CZ 1 2; H 1; H 2; CZ 1 2; H 1; CZ 0 1; H 1; CZ 1 2; H 1; H 2; CZ 1 2; H 1; H 2; CZ 1 2; H 1; CZ 1 2",
    ];
    assert_eq!(unsound, expected_unsound);

    let mut identical = 0;
    let mut clean_mismatch = Vec::new();
    for p in &printed {
        let d = find(&derived, p);
        assert_eq!(p.tag, d.tag, "{p}");
        if p == d {
            identical += 1;
        }
        if clean_part(p) != clean_part(d) {
            clean_mismatch.push(p.to_string());
        }
    }
    assert_eq!(identical, 109);
    // Each printed relation names the same clean gates as the derived one,
    // except where the printed version is ill-typed or unsound.
    assert_eq!(
        clean_mismatch,
        [
            "[family1] @colors P; H 0; A3 0 -> A2 0; H 0",
            "[family2] @colors S; X 0; C1 0 -> C1 0; Z 0",
            "[family2] @colors S; X 0; C2 0 -> C2 0; Z 0",
        ]
    );
}

/// Where a printed relation is sound, the derived one is no longer.
#[test]
fn derived_rules_are_shortest() {
    let printed = parse_rules(TRANSCRIBED).unwrap();
    let derived = RelationSet::Typed.rules();
    for p in printed.iter().filter(|r| r.is_sound()) {
        let d = find(&derived, p);
        assert!(d.rhs.len() <= p.rhs.len(), "{d}\nlonger than\n{p}");
    }
}
