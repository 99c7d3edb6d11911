//! Checks for the chained genus-g page with g + 2 boundary components: the
//! one-block case agrees with the three-holed torus family curve by curve,
//! and the monodromy `psi` yields the same first homology as the rectangle
//! page of the same genus and as the closed-form circle-bundle answer.

use openbook_core::factorization::OpenBook;
use openbook_core::invariants::{h1_open_book, AbelianGroup};
use openbook_core::{curves, mcg};
use openbook_paperlib::build;
use num_bigint::BigInt;

/// First homology of the unit circle bundle over the closed orientable
/// surface of genus g, from the Gysin sequence: the Euler number 2g - 2
/// kills that multiple of the fiber class.
fn circle_bundle_h1_orientable(g: usize) -> AbelianGroup {
    if g == 1 {
        AbelianGroup::free(3)
    } else {
        AbelianGroup {
            free_rank: 2 * g,
            torsion: vec![BigInt::from(2 * g as i64 - 2)],
        }
    }
}

#[test]
fn one_block_chain_reproduces_the_three_holed_torus() {
    let chained = build("thm-g+2", 1).unwrap();
    let block = build("vhm-3holed", 1).unwrap();
    assert_eq!(chained.page.hash(), block.page.hash());

    // Same page, so curves from both families can be compared directly:
    // the drawn staircases recover the twist images defining u0 and u2.
    let t = &chained.page;
    for name in ["u0", "u2"] {
        assert!(
            curves::is_isotopic(t, chained.curve(name).unwrap(), block.curve(name).unwrap())
                .unwrap(),
            "staircase {name} differs from the twist image"
        );
    }
    assert!(curves::is_isotopic(t, chained.curve("u1_1").unwrap(), block.curve("b").unwrap()).unwrap());

    let psi = chained.factorization("psi").unwrap();
    let psi1 = block.factorization("psi1").unwrap();
    assert!(mcg::equal(
        t,
        &openbook_core::factorization::total_monodromy(t, psi).unwrap(),
        &openbook_core::factorization::total_monodromy(t, psi1).unwrap(),
    )
    .unwrap());
}

#[test]
fn chained_pages_classify_up_to_five() {
    for g in 1..=5 {
        // The builder itself checks genus g with g + 2 boundary components.
        build("thm-g+2", g).unwrap();
    }
}

#[test]
fn chained_open_books_match_rectangle_pages_and_circle_bundles() {
    for g in 1..=3 {
        let chained = build("thm-g+2", g).unwrap();
        let ob = OpenBook::new(
            chained.page.clone(),
            chained.factorization("psi").unwrap().clone(),
        )
        .unwrap();
        let left = h1_open_book(&ob).unwrap();

        let rect = build("thm-ope", g).unwrap();
        let obr = OpenBook::new(rect.page.clone(), rect.factorization("phi").unwrap().clone())
            .unwrap();
        let right = h1_open_book(&obr).unwrap();

        let oracle = circle_bundle_h1_orientable(g);
        assert_eq!(left, oracle, "chained page at g = {g}");
        assert_eq!(right, oracle, "rectangle page at g = {g}");
    }
}

#[test]
fn chained_family_round_trips() {
    let fam = build("thm-g+2", 2).unwrap();
    let json = fam.to_json();
    let back = openbook_paperlib::NamedFamily::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
}
