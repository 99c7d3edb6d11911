use openbook_core::{curves, mcg};
use openbook_core::mcg::Word;
use openbook_paperlib::build;

fn main() {
    let fam = build("vhm-3holed", 1).unwrap();
    let t = &fam.page;
    let a1 = fam.curve("a1").unwrap();
    let a2 = fam.curve("a2").unwrap();
    let a3 = fam.curve("a3").unwrap();
    let b = fam.curve("b").unwrap();
    let u0 = fam.curve("u0").unwrap();
    let u2 = fam.curve("u2").unwrap();

    // Candidate M = D(x) D(y) D^-1(b) acting on gamma = a3.
    for (nx, x) in [("a1", a1), ("a2", a2)] {
        let y = if nx == "a1" { a2 } else { a1 };
        let m = Word::concat(
            t,
            &[
                &Word::twist(t, x, 1).unwrap(),
                &Word::twist(t, y, 1).unwrap(),
                &Word::twist(t, b, -1).unwrap(),
            ],
        )
        .unwrap();
        let g_up = mcg::apply(t, &m, a3).unwrap();
        let up2 = curves::is_isotopic(t, &g_up, u2).unwrap();
        let g_dn = mcg::apply(t, &m.inverse(), a3).unwrap();
        let dn0 = curves::is_isotopic(t, &g_dn, u0).unwrap();
        println!("M = D({nx})D(..)D^-1(b): M(a3)==u2: {up2}   M^-1(a3)==u0: {dn0}");
        // Also try the opposite handedness on b.
        let m2 = Word::concat(
            t,
            &[
                &Word::twist(t, x, -1).unwrap(),
                &Word::twist(t, y, -1).unwrap(),
                &Word::twist(t, b, 1).unwrap(),
            ],
        )
        .unwrap();
        let h_up = mcg::apply(t, &m2, a3).unwrap();
        println!("  flipped-M(a3)==u2: {}", curves::is_isotopic(t, &h_up, u2).unwrap());
        println!("  flipped-M(a3)==u0: {}", curves::is_isotopic(t, &h_up, u0).unwrap());
    }
}
