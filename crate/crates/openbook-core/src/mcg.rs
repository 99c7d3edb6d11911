//! Mapping classes of a page, presented as words in Dehn twists.
//!
//! A [`Word`] stores its twist atoms in display order: the word
//! D(c1)^{s1} D(c2)^{s2} ... D(ck)^{sk} lists the atom for c1 first,
//! and acts on curves by applying the rightmost factor first.  Equality
//! of words is decided by the Alexander method: two mapping classes of
//! a compact surface whose vertices all sit on the boundary agree
//! exactly when they agree on the arcs parallel to the interior edges
//! of the triangulation, since cutting along those arcs decomposes the
//! page into disks.  A homological fingerprint (the induced action on
//! H1 of the page) is compared first as a fast refuter.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::curves::{self, Curve, CurveKind};
use crate::error::{Error, Result};
use crate::invariants::{self, Mat};
use crate::surface::Triangulation;

/// Sign relating the crossing-vector intersection pairing to the
/// transvection formula for a right-handed twist's action on H1.  The
/// twist surgery's handedness is pinned on the annulus (positive twist of
/// the core against a diagonal arc yields the seam), and this sign is then
/// forced by the genus-one page where the pairing is nonzero: apply()
/// rechecks every twist against the transvection in debug builds.
const EPS_SIGN: i64 = 1;

/// One twist factor: a Dehn twist about an essential closed curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub curve: Curve,
    /// +1 for a right-handed twist, -1 for its inverse.
    pub sign: i8,
}

/// A word in Dehn twists, in display order (rightmost factor acts first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub page: String,
    pub atoms: Vec<Atom>,
}

fn check_atom(t: &Triangulation, atom: &Atom) -> Result<Atom> {
    if atom.curve.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    if atom.curve.kind != CurveKind::Closed {
        return Err(Error::InvalidSpec {
            reason: "twist curves must be closed".into(),
        });
    }
    if atom.sign != 1 && atom.sign != -1 {
        return Err(Error::InvalidSpec {
            reason: format!("twist sign must be +1 or -1, got {}", atom.sign),
        });
    }
    let curve = curves::normalize(t, &atom.curve)?;
    if curve.is_trivial() {
        return Err(Error::TrivialTwistCurve);
    }
    Ok(Atom {
        curve,
        sign: atom.sign,
    })
}

impl Word {
    pub fn identity(t: &Triangulation) -> Word {
        Word {
            page: t.hash().to_string(),
            atoms: Vec::new(),
        }
    }

    /// Build a word, normalizing every twist curve.
    pub fn new(t: &Triangulation, atoms: Vec<Atom>) -> Result<Word> {
        let atoms = atoms
            .iter()
            .map(|a| check_atom(t, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word {
            page: t.hash().to_string(),
            atoms,
        })
    }

    pub fn twist(t: &Triangulation, curve: &Curve, sign: i8) -> Result<Word> {
        Word::new(
            t,
            vec![Atom {
                curve: curve.clone(),
                sign,
            }],
        )
    }

    pub fn inverse(&self) -> Word {
        Word {
            page: self.page.clone(),
            atoms: self
                .atoms
                .iter()
                .rev()
                .map(|a| Atom {
                    curve: a.curve.clone(),
                    sign: -a.sign,
                })
                .collect(),
        }
    }

    /// Concatenation in display order: `concat([u, v])` is the word u·v
    /// (v acts first).
    pub fn concat(t: &Triangulation, parts: &[&Word]) -> Result<Word> {
        let mut atoms = Vec::new();
        for p in parts {
            if p.page != t.hash() {
                return Err(Error::PageMismatch);
            }
            atoms.extend(p.atoms.iter().cloned());
        }
        Ok(Word {
            page: t.hash().to_string(),
            atoms,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "page": self.page,
            "atoms": self.atoms.iter().map(|a| serde_json::json!({
                "curve": a.curve.to_json(),
                "sign": a.sign,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(t: &Triangulation, v: &serde_json::Value) -> Result<Word> {
        let bad = |reason: &str| Error::InvalidSpec {
            reason: format!("word JSON: {reason}"),
        };
        let page = v["page"].as_str().ok_or_else(|| bad("missing page"))?;
        if page != t.hash() {
            return Err(Error::PageMismatch);
        }
        let mut atoms = Vec::new();
        for item in v["atoms"].as_array().ok_or_else(|| bad("missing atoms"))? {
            let curve = Curve::from_json(t, &item["curve"])?;
            let sign = item["sign"].as_i64().ok_or_else(|| bad("missing sign"))? as i8;
            atoms.push(Atom { curve, sign });
        }
        Word::new(t, atoms)
    }
}

/// The transvection a twist induces on H1 of the page:
/// v -> v + eps * sign * <v, c> * [c].
pub(crate) fn transvection_matrix(t: &Triangulation, curve: &Curve, sign: i8) -> Result<Mat> {
    let data = invariants::h1_data(t);
    let h = data.rank;
    let mut m = invariants::mat_identity(h);
    if h == 0 {
        return Ok(m);
    }
    let nc = curves::normalize(t, curve)?;
    let psi = curves::psi_vector(t, &nc);
    let u = invariants::class_from_chain(t, &curves::chain_vector(t, &nc));
    // r = Z^T psi: the intersection pairing of the basis cycles with the
    // twist curve, read off transversally.  u and r both flip under
    // reversing the curve, so u * r^T does not depend on its direction.
    let mut r = vec![BigInt::zero(); h];
    for (e, psi_e) in psi.iter().enumerate() {
        if psi_e.is_zero() {
            continue;
        }
        for j in 0..h {
            r[j] += psi_e * &data.cycles[e][j];
        }
    }
    let scale = BigInt::from(EPS_SIGN * sign as i64);
    for i in 0..h {
        for j in 0..h {
            m[i][j] += &scale * &u[i] * &r[j];
        }
    }
    Ok(m)
}

/// Induced action of a word on H1 of the page, as a matrix in the
/// page's cycle basis (display order product).
pub fn induced_h1_matrix(t: &Triangulation, w: &Word) -> Result<Mat> {
    if w.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    let h = invariants::h1_data(t).rank;
    let mut m = invariants::mat_identity(h);
    for atom in &w.atoms {
        m = invariants::mat_mul(&m, &transvection_matrix(t, &atom.curve, atom.sign)?);
    }
    Ok(m)
}

/// Apply a word to a curve (arc or closed); the result is normalized.
pub fn apply(t: &Triangulation, w: &Word, c: &Curve) -> Result<Curve> {
    if w.page != t.hash() || c.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    let mut cur = curves::normalize(t, c)?;
    for atom in w.atoms.iter().rev() {
        let twist_curve = curves::normalize(t, &atom.curve)?;
        if twist_curve.is_trivial() {
            return Err(Error::TrivialTwistCurve);
        }
        #[cfg(debug_assertions)]
        let before = if cur.kind == CurveKind::Closed {
            Some(curves::homology_class(t, &cur, false)?)
        } else {
            None
        };
        let next = curves::twist_once(t, &twist_curve, atom.sign, &cur)?;
        // Self-check: the homology class must move by the transvection.
        // Canonical forms forget the curve's direction, so the image may
        // come back reversed; accept the class up to a global sign.
        #[cfg(debug_assertions)]
        if let Some(v) = before {
            let m = transvection_matrix(t, &atom.curve, atom.sign)?;
            let expect = invariants::mat_vec(&m, &v);
            let neg: Vec<BigInt> = expect.iter().map(|x| -x.clone()).collect();
            let got = curves::homology_class(t, &next, false)?;
            debug_assert!(
                got == expect || got == neg,
                "twist image has the wrong homology class: got {got:?}, want +/-{expect:?}"
            );
        }
        cur = next;
    }
    Ok(cur)
}

/// Image of a curve under conjugation: w D(c) w^{-1} = D(w(c)).
pub fn conjugate_curve(t: &Triangulation, w: &Word, c: &Curve) -> Result<Curve> {
    apply(t, w, c)
}

/// Equality of mapping classes by the Alexander method, after comparing
/// induced H1 actions as a fast refuter.
pub fn equal(t: &Triangulation, a: &Word, b: &Word) -> Result<bool> {
    if a.page != t.hash() || b.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    if induced_h1_matrix(t, a)? != induced_h1_matrix(t, b)? {
        return Ok(false);
    }
    for e in t.interior_edge_ids() {
        let arc = curves::edge_parallel_arc(t, e)?;
        if apply(t, a, &arc)? != apply(t, b, &arc)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_identity(t: &Triangulation, w: &Word) -> Result<bool> {
    equal(t, w, &Word::identity(t))
}

/// Checked rewrite of a conjugated twist: verifies that
/// w D(c)^s w^{-1} equals D(w(c))^s as mapping classes and returns the
/// rewritten atom.
pub fn rewrite_conjugation(
    t: &Triangulation,
    w: &Word,
    curve: &Curve,
    sign: i8,
) -> Result<Atom> {
    let image = apply(t, w, curve)?;
    let rewritten = Word::twist(t, &image, sign)?;
    let direct = Word::concat(
        t,
        &[w, &Word::twist(t, curve, sign)?, &w.inverse()],
    )?;
    if !equal(t, &direct, &rewritten)? {
        return Err(Error::InvalidSpec {
            reason: "conjugation rewrite failed verification".into(),
        });
    }
    Ok(Atom {
        curve: image,
        sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{edge_parallel_arc, normalize, Curve, Port, Seg};
    use crate::surface::{
        build_surface, GluingDirection, Identification, PolygonDecl, PolygonSpec, SideRef,
    };

    fn annulus() -> Triangulation {
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "sq".into(),
                sides: vec!["b".into(), "r".into(), "t".into(), "l".into()],
            }],
            identifications: vec![Identification(
                SideRef {
                    polygon: "sq".into(),
                    index: 1,
                },
                SideRef {
                    polygon: "sq".into(),
                    index: 3,
                },
                GluingDirection::Reversed,
            )],
        };
        build_surface(&spec).unwrap()
    }

    fn core(t: &Triangulation) -> Curve {
        let segs = vec![
            Seg {
                tri: 0,
                enter: Port::Side(2),
                exit: Port::Side(1),
            },
            Seg {
                tri: 1,
                enter: Port::Side(2),
                exit: Port::Side(0),
            },
        ];
        normalize(t, &Curve::closed(t, segs).unwrap()).unwrap()
    }

    #[test]
    fn word_roundtrip_and_inverse() {
        let t = annulus();
        let x = core(&t);
        let w = Word::twist(&t, &x, 1).unwrap();
        let arc = edge_parallel_arc(&t, 3).unwrap();
        let img = apply(&t, &w, &arc).unwrap();
        assert_ne!(img, arc);
        let back = apply(&t, &w.inverse(), &img).unwrap();
        assert_eq!(back, arc);
        let both = Word::concat(&t, &[&w.inverse(), &w]).unwrap();
        assert_eq!(apply(&t, &both, &arc).unwrap(), arc);
    }

    #[test]
    fn identity_detection_uses_arcs() {
        let t = annulus();
        let x = core(&t);
        let w = Word::twist(&t, &x, 1).unwrap();
        // On the annulus the twist acts trivially on H1, so only the
        // Alexander arcs can distinguish it from the identity.
        let m = induced_h1_matrix(&t, &w).unwrap();
        assert_eq!(m, invariants::mat_identity(1));
        assert!(!is_identity(&t, &w).unwrap());
        let trivial = Word::concat(&t, &[&w, &w.inverse()]).unwrap();
        assert!(is_identity(&t, &trivial).unwrap());
        assert!(equal(&t, &w, &w).unwrap());
    }

    #[test]
    fn twists_about_isotopic_curves_are_equal() {
        let t = annulus();
        let x = core(&t);
        let collar = crate::curves::boundary_collar(&t, 1).unwrap();
        let w1 = Word::twist(&t, &x, 1).unwrap();
        let w2 = Word::twist(&t, &collar, 1).unwrap();
        assert!(equal(&t, &w1, &w2).unwrap());
    }

    #[test]
    fn trivial_twist_curve_is_rejected() {
        let t = annulus();
        let tiny = Curve::closed(
            &t,
            vec![
                Seg {
                    tri: 0,
                    enter: Port::Side(1),
                    exit: Port::Side(1),
                },
                Seg {
                    tri: 1,
                    enter: Port::Side(2),
                    exit: Port::Side(2),
                },
            ],
        )
        .unwrap();
        match Word::twist(&t, &tiny, 1) {
            Err(Error::TrivialTwistCurve) => {}
            other => panic!("expected TrivialTwistCurve, got {other:?}"),
        }
    }

    #[test]
    fn conjugation_rewrite_checks_out() {
        let t = annulus();
        let x = core(&t);
        let w = Word::twist(&t, &x, 1).unwrap();
        let atom = rewrite_conjugation(&t, &w, &x, 1).unwrap();
        assert_eq!(atom.curve, x);
        let atom = rewrite_conjugation(&t, &w, &x, -1).unwrap();
        assert_eq!(atom.sign, -1);
    }

    #[test]
    fn word_json_round_trip() {
        let t = annulus();
        let x = core(&t);
        let w = Word::new(
            &t,
            vec![
                Atom {
                    curve: x.clone(),
                    sign: 1,
                },
                Atom {
                    curve: x.clone(),
                    sign: -1,
                },
            ],
        )
        .unwrap();
        let j = w.to_json();
        let back = Word::from_json(&t, &j).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn page_mismatch_rejected() {
        let t = annulus();
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "sq".into(),
                sides: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            }],
            identifications: vec![],
        };
        let disk = build_surface(&spec).unwrap();
        let x = core(&t);
        match Word::twist(&disk, &x, 1) {
            Err(Error::PageMismatch) => {}
            other => panic!("expected PageMismatch, got {other:?}"),
        }
    }
}
