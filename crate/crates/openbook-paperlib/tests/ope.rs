//! The rectangle families: lantern pin on the one-handle page, surface
//! classification, and the homology of the associated three- and
//! four-manifolds against closed-form oracles.

use num_bigint::BigInt;
use openbook_core::factorization::OpenBook;
use openbook_core::invariants::{h1_open_book, lefschetz_invariants, AbelianGroup};
use openbook_core::mcg;
use openbook_paperlib::{build, proof_script, NamedFamily, ProofScript};

/// First homology of the unit circle bundle of the closed orientable
/// surface of genus g, from the Gysin sequence: the Euler class kills a
/// Z/(2g-2) factor of the fiber class (nothing for g = 1).
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

/// First homology of the unit circle bundle of the closed nonorientable
/// surface with k crosscaps: Z/4 for k = 1, and Z^{k-1} plus (Z/2)^2 for
/// even k or Z/4 for odd k >= 3.
fn circle_bundle_h1_nonorientable(k: usize) -> AbelianGroup {
    if k == 1 {
        AbelianGroup {
            free_rank: 0,
            torsion: vec![BigInt::from(4)],
        }
    } else if k % 2 == 0 {
        AbelianGroup {
            free_rank: k - 1,
            torsion: vec![BigInt::from(2), BigInt::from(2)],
        }
    } else {
        AbelianGroup {
            free_rank: k - 1,
            torsion: vec![BigInt::from(4)],
        }
    }
}

fn open_book(fam: &NamedFamily) -> OpenBook {
    OpenBook::new(
        fam.page.clone(),
        fam.factorization("phi").unwrap().clone(),
    )
    .unwrap()
}

#[test]
fn lantern_relation_holds() {
    match proof_script("lantern", 1).unwrap() {
        ProofScript::Relation { page, left, right } => {
            assert!(mcg::equal(&page, &left, &right).unwrap());
        }
        _ => panic!("lantern is a relation pair"),
    }
}

#[test]
fn genus_pages_classify_up_to_five() {
    for g in 1..=5 {
        // class and intersection checks run inside build()
        build("thm-ope", g).unwrap();
    }
}

#[test]
fn crosscap_pages_classify_up_to_five() {
    for k in 1..=5 {
        build("thm-ope2", k).unwrap();
    }
}

#[test]
fn genus_open_books_match_circle_bundle_homology() {
    for g in 1..=3 {
        let fam = build("thm-ope", g).unwrap();
        let h1 = h1_open_book(&open_book(&fam)).unwrap();
        assert_eq!(h1, circle_bundle_h1_orientable(g), "g = {g}");
    }
}

#[test]
fn crosscap_open_books_match_circle_bundle_homology() {
    for k in 1..=3 {
        let fam = build("thm-ope2", k).unwrap();
        let h1 = h1_open_book(&open_book(&fam)).unwrap();
        assert_eq!(h1, circle_bundle_h1_nonorientable(k), "k = {k}");
    }
}

#[test]
fn genus_lefschetz_fibrations() {
    for g in 1..=3 {
        let fam = build("thm-ope", g).unwrap();
        let lf = lefschetz_invariants(&open_book(&fam)).unwrap();
        assert_eq!(lf.chi, 2 - 2 * g as i64, "g = {g}");
        assert_eq!(lf.h1, AbelianGroup::free(2 * g), "g = {g}");
        assert_eq!(lf.h2_rank, 1, "g = {g}");
    }
}

#[test]
fn crosscap_lefschetz_fibrations() {
    for k in 1..=3 {
        let fam = build("thm-ope2", k).unwrap();
        let lf = lefschetz_invariants(&open_book(&fam)).unwrap();
        assert_eq!(lf.chi, 2 - k as i64, "k = {k}");
        assert_eq!(
            lf.h1,
            AbelianGroup {
                free_rank: k - 1,
                torsion: vec![BigInt::from(2)],
            },
            "k = {k}"
        );
        assert_eq!(lf.h2_rank, 0, "k = {k}");
    }
}

#[test]
fn rectangle_families_round_trip() {
    for (name, parameter) in [("thm-ope", 2), ("thm-ope2", 2)] {
        let fam = build(name, parameter).unwrap();
        let j1 = fam.to_json();
        let reparsed = NamedFamily::from_json(&j1).unwrap();
        assert_eq!(
            serde_json::to_string(&j1).unwrap(),
            serde_json::to_string(&reparsed.to_json()).unwrap()
        );
    }
}
