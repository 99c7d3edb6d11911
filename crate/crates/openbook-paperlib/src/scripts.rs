//! Proof scripts: relation pairs fed to the word-problem solver and move
//! scripts replaying displayed derivations step by step.

use openbook_core::curves::{self, Curve};
use openbook_core::factorization::{Factorization, MoveScript, Step};
use openbook_core::mcg::Word;
use openbook_core::surface::Triangulation;

use crate::families::{build, twist_word};
use crate::{Error, Result};

/// The five script names accepted by [`proof_script`].
pub const SCRIPT_NAMES: [&str; 5] = [
    "gplus2-chain",
    "vhm-hurwitz",
    "vhm-star",
    "vhm-chain-relation",
    "lantern",
];

/// Either a pair of words expected to be equal in the mapping class group,
/// or a move script between two factorizations.
#[derive(Debug, Clone)]
pub enum ProofScript {
    Relation {
        page: Triangulation,
        left: Word,
        right: Word,
    },
    Script {
        page: Triangulation,
        start: Factorization,
        script: MoveScript,
        target: Factorization,
    },
}

/// Assemble a named proof script.
pub fn proof_script(name: &str, parameter: usize) -> Result<ProofScript> {
    match name {
        "vhm-star" => vhm_star(parameter),
        "vhm-chain-relation" => vhm_chain_relation(parameter),
        "vhm-hurwitz" => vhm_hurwitz(parameter),
        "lantern" => lantern(parameter),
        "gplus2-chain" => gplus2_chain(parameter),
        _ => Err(Error::UnknownName { name: name.into() }),
    }
}

fn require_parameter(name: &str, parameter: usize, expected: usize) -> Result<()> {
    if parameter != expected {
        return Err(Error::UnsupportedParameter {
            name: name.into(),
            parameter,
            detail: format!("this script is specific to parameter {expected}"),
        });
    }
    Ok(())
}

/// Star relation on the three-holed torus:
/// `D(delta1) D(delta2) D(delta3) = (D(b) D(a1) D(a2) D(a3))^3`.
fn vhm_star(parameter: usize) -> Result<ProofScript> {
    require_parameter("vhm-star", parameter, 1)?;
    let fam = build("vhm-3holed", 1)?;
    let t = &fam.page;
    let left = twist_word(
        t,
        &[
            fam.curve("delta1")?,
            fam.curve("delta2")?,
            fam.curve("delta3")?,
        ],
    )?;
    let factor = twist_word(
        t,
        &[
            fam.curve("b")?,
            fam.curve("a1")?,
            fam.curve("a2")?,
            fam.curve("a3")?,
        ],
    )?;
    let right = Word::concat(t, &[&factor, &factor, &factor])?;
    Ok(ProofScript::Relation {
        page: fam.page.clone(),
        left,
        right,
    })
}

/// Chain-type relation on the four-holed torus:
/// `D(delta1)..D(delta4) = (D(a1) D(a3) D(b) D(a2) D(a4) D(b))^2`.
fn vhm_chain_relation(parameter: usize) -> Result<ProofScript> {
    require_parameter("vhm-chain-relation", parameter, 1)?;
    let fam = build("vhm-4holed", 1)?;
    let t = &fam.page;
    let left = twist_word(
        t,
        &[
            fam.curve("delta1")?,
            fam.curve("delta2")?,
            fam.curve("delta3")?,
            fam.curve("delta4")?,
        ],
    )?;
    let factor = twist_word(
        t,
        &[
            fam.curve("a1")?,
            fam.curve("a3")?,
            fam.curve("b")?,
            fam.curve("a2")?,
            fam.curve("a4")?,
            fam.curve("b")?,
        ],
    )?;
    let right = Word::concat(t, &[&factor, &factor])?;
    Ok(ProofScript::Relation {
        page: fam.page.clone(),
        left,
        right,
    })
}

/// The single Hurwitz move taking `phi1tilde` to `phi1` on the four-holed
/// torus, after the global conjugation by `A B = D(a1)D(a3)D(a2)D(a4)`.
/// The move acts on the stored pair whose display form is the last two
/// entries; the rewrite step recognizes the moved curve as `B^-1 A(b)`.
fn vhm_hurwitz(parameter: usize) -> Result<ProofScript> {
    require_parameter("vhm-hurwitz", parameter, 1)?;
    let fam = build("vhm-4holed", 1)?;
    let t = &fam.page;
    let aw = twist_word(t, &[fam.curve("a1")?, fam.curve("a3")?])?;
    let bw = twist_word(t, &[fam.curve("a2")?, fam.curve("a4")?])?;
    let conj = Word::concat(t, &[&aw, &bw])?;
    let rewrite = Word::concat(t, &[&bw.inverse(), &aw])?;
    let script = MoveScript {
        steps: vec![
            Step::Conjugate { word: conj },
            Step::Hurwitz { index: 0 },
            Step::RewriteConjugation {
                index: 1,
                word: rewrite,
                source: fam.curve("b")?.clone(),
            },
        ],
    };
    Ok(ProofScript::Script {
        page: fam.page.clone(),
        start: fam.factorization("phi1tilde")?.clone(),
        script,
        target: fam.factorization("phi1")?.clone(),
    })
}

/// Lantern relation on the one-handle page (a four-holed sphere):
/// `D(v0) D(v1_1) D(v2) = D(b0) D(b1) D(b2) D(b3)` for the four boundary
/// collars.
fn lantern(parameter: usize) -> Result<ProofScript> {
    require_parameter("lantern", parameter, 1)?;
    let fam = build("thm-ope2", 1)?;
    let t = &fam.page;
    let left = twist_word(
        t,
        &[fam.curve("v0")?, fam.curve("v1_1")?, fam.curve("v2")?],
    )?;
    let collars = (0..4)
        .map(|c| curves::boundary_collar(t, c))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let refs: Vec<&Curve> = collars.iter().collect();
    let right = twist_word(t, &refs)?;
    Ok(ProofScript::Relation {
        page: fam.page.clone(),
        left,
        right,
    })
}

fn gplus2_chain(parameter: usize) -> Result<ProofScript> {
    if parameter == 0 {
        return Err(Error::UnsupportedParameter {
            name: "gplus2-chain".into(),
            parameter,
            detail: "the chain is defined for genus at least 1".into(),
        });
    }
    Err(Error::ValidationFailed {
        name: "gplus2-chain".into(),
        reason: "not yet assembled".into(),
    })
}
