//! The four-holed torus family: chain-type relation, the one-move Hurwitz
//! derivation of the four-twist factorization, and the homology anchor.

use openbook_core::factorization::{run_script, total_monodromy, OpenBook};
use openbook_core::invariants::{h1_open_book, AbelianGroup};
use openbook_core::mcg::{self, Word};
use openbook_paperlib::families::twist_word;
use openbook_paperlib::{build, proof_script, ProofScript};

#[test]
fn chain_type_relation_holds() {
    match proof_script("vhm-chain-relation", 1).unwrap() {
        ProofScript::Relation { page, left, right } => {
            assert!(mcg::equal(&page, &left, &right).unwrap());
        }
        _ => panic!("vhm-chain-relation is a relation pair"),
    }
}

#[test]
fn four_twist_form_equals_vertical_morse_monodromy() {
    let fam = build("vhm-4holed", 1).unwrap();
    let t = &fam.page;
    // phi1tilde's total monodromy must equal the vertical Morse word
    // D^-2(a1) D^-2(a2) D^-2(a3) D^-2(a4) D(delta1) D(delta2) D(delta3) D(delta4).
    let mut negatives = Vec::new();
    for name in ["a1", "a2", "a3", "a4"] {
        let w = Word::twist(t, fam.curve(name).unwrap(), -1).unwrap();
        negatives.push(w.clone());
        negatives.push(w);
    }
    let deltas = twist_word(
        t,
        &[
            fam.curve("delta1").unwrap(),
            fam.curve("delta2").unwrap(),
            fam.curve("delta3").unwrap(),
            fam.curve("delta4").unwrap(),
        ],
    )
    .unwrap();
    let mut parts: Vec<&Word> = negatives.iter().collect();
    parts.push(&deltas);
    let tilde = Word::concat(t, &parts).unwrap();
    let total = total_monodromy(t, fam.factorization("phi1tilde").unwrap()).unwrap();
    assert!(mcg::equal(t, &total, &tilde).unwrap());
}

#[test]
fn hurwitz_script_takes_phi1tilde_to_phi1() {
    match proof_script("vhm-hurwitz", 1).unwrap() {
        ProofScript::Script {
            page,
            start,
            script,
            target,
        } => {
            let report = run_script(&page, &start, &script, &target).unwrap();
            assert!(report.final_matches_target);
            assert!(report.verified, "{:#?}", report.steps);
        }
        _ => panic!("vhm-hurwitz is a move script"),
    }
}

#[test]
fn open_book_h1_is_z3() {
    let fam = build("vhm-4holed", 1).unwrap();
    let ob = OpenBook::new(
        fam.page.clone(),
        fam.factorization("phi1").unwrap().clone(),
    )
    .unwrap();
    assert_eq!(h1_open_book(&ob).unwrap(), AbelianGroup::free(3));
}

#[test]
fn family_serialization_round_trips() {
    let fam = build("vhm-4holed", 1).unwrap();
    let j1 = fam.to_json();
    let reparsed = openbook_paperlib::NamedFamily::from_json(&j1).unwrap();
    let j2 = reparsed.to_json();
    assert_eq!(
        serde_json::to_string(&j1).unwrap(),
        serde_json::to_string(&j2).unwrap()
    );
}
