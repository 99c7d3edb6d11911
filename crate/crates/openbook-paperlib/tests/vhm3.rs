//! The three-holed torus family: star relation, the derived three-twist
//! factorization, and the first-homology anchor of its open book.

use num_bigint::BigInt;
use openbook_core::factorization::OpenBook;
use openbook_core::invariants::{h1_open_book, AbelianGroup};
use openbook_core::mcg::{self, Word};
use openbook_paperlib::families::twist_word;
use openbook_paperlib::{build, proof_script, ProofScript};

#[test]
fn star_relation_holds() {
    match proof_script("vhm-star", 1).unwrap() {
        ProofScript::Relation { page, left, right } => {
            assert!(mcg::equal(&page, &left, &right).unwrap());
        }
        _ => panic!("vhm-star is a relation pair"),
    }
}

#[test]
fn vertical_morse_monodromy_equals_three_twists_up_to_conjugation() {
    let fam = build("vhm-3holed", 1).unwrap();
    let t = &fam.page;
    // psi1 = D(delta1) D(delta2) D(delta3) D^-3(a1) D^-3(a2) D^-3(a3).
    let deltas = twist_word(
        t,
        &[
            fam.curve("delta1").unwrap(),
            fam.curve("delta2").unwrap(),
            fam.curve("delta3").unwrap(),
        ],
    )
    .unwrap();
    let mut negatives = Vec::new();
    for name in ["a1", "a2", "a3"] {
        let w = Word::twist(t, fam.curve(name).unwrap(), -1).unwrap();
        for _ in 0..3 {
            negatives.push(w.clone());
        }
    }
    let mut parts: Vec<&Word> = vec![&deltas];
    parts.extend(negatives.iter());
    let psi1 = Word::concat(t, &parts).unwrap();

    // The derivation conjugates the three-twist form by T = D(a1)D(a2)D(a3):
    // psi1 = T (D(u0) D(b) D(u2)) T^-1.
    let tw = twist_word(
        t,
        &[
            fam.curve("a1").unwrap(),
            fam.curve("a2").unwrap(),
            fam.curve("a3").unwrap(),
        ],
    )
    .unwrap();
    let three = twist_word(
        t,
        &[
            fam.curve("u0").unwrap(),
            fam.curve("b").unwrap(),
            fam.curve("u2").unwrap(),
        ],
    )
    .unwrap();
    let conjugated = Word::concat(t, &[&tw, &three, &tw.inverse()]).unwrap();
    assert!(mcg::equal(t, &psi1, &conjugated).unwrap());
}

#[test]
fn open_book_h1_is_z3() {
    let fam = build("vhm-3holed", 1).unwrap();
    let ob = OpenBook::new(
        fam.page.clone(),
        fam.factorization("psi1").unwrap().clone(),
    )
    .unwrap();
    let h1 = h1_open_book(&ob).unwrap();
    assert_eq!(h1, AbelianGroup::free(3));
    assert!(h1.torsion.iter().all(|t| t != &BigInt::from(0)));
}

#[test]
fn family_serialization_round_trips() {
    let fam = build("vhm-3holed", 1).unwrap();
    let j1 = fam.to_json();
    let reparsed = openbook_paperlib::NamedFamily::from_json(&j1).unwrap();
    let j2 = reparsed.to_json();
    assert_eq!(
        serde_json::to_string(&j1).unwrap(),
        serde_json::to_string(&j2).unwrap()
    );
}
