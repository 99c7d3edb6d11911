//! Builders for the named families: page, curve table, factorizations.

use std::collections::BTreeMap;

use openbook_core::chart::{Chart, ChartBundle};
use openbook_core::curves::{self, Curve};
use openbook_core::factorization::{Factorization, MoveScript};
use openbook_core::mcg::{self, Word};
use openbook_core::surface::{classify, Triangulation};
use serde_json::Value;

use crate::charts;
use crate::{Error, Result};

/// The six family names accepted by [`build`].
pub const FAMILY_NAMES: [&str; 6] = [
    "thm-ope",
    "thm-g+2",
    "vhm-4holed",
    "vhm-3holed",
    "thm-ope2",
    "stabilized-g",
];

/// A page with its named curves and the factorizations built from them.
#[derive(Debug, Clone)]
pub struct NamedFamily {
    pub name: String,
    pub parameter: usize,
    pub page: Triangulation,
    pub curves: BTreeMap<String, Curve>,
    pub factorizations: BTreeMap<String, Factorization>,
    pub script: Option<MoveScript>,
}

impl NamedFamily {
    pub fn curve(&self, name: &str) -> Result<&Curve> {
        self.curves.get(name).ok_or_else(|| Error::UnknownName {
            name: format!("{}::{}", self.name, name),
        })
    }

    pub fn factorization(&self, name: &str) -> Result<&Factorization> {
        self.factorizations
            .get(name)
            .ok_or_else(|| Error::UnknownName {
                name: format!("{}::{}", self.name, name),
            })
    }

    pub fn to_json(&self) -> Value {
        let curves: serde_json::Map<String, Value> = self
            .curves
            .iter()
            .map(|(k, c)| (k.clone(), c.to_json()))
            .collect();
        let facts: serde_json::Map<String, Value> = self
            .factorizations
            .iter()
            .map(|(k, f)| (k.clone(), f.to_json()))
            .collect();
        serde_json::json!({
            "name": self.name,
            "parameter": self.parameter,
            "page": self.page.to_json(),
            "curves": curves,
            "factorizations": facts,
            "script": self.script.as_ref().map(|s| s.to_json()),
        })
    }

    /// Parse a serialized family.  The page is rebuilt from the recorded
    /// name and parameter (triangulations are not deserializable on their
    /// own) and must agree with the stored page JSON.
    pub fn from_json(v: &Value) -> Result<NamedFamily> {
        let name = v["name"].as_str().ok_or_else(|| Error::ValidationFailed {
            name: "(parse)".into(),
            reason: "missing name".into(),
        })?;
        let parameter = v["parameter"]
            .as_u64()
            .ok_or_else(|| Error::ValidationFailed {
                name: name.into(),
                reason: "missing parameter".into(),
            })? as usize;
        let rebuilt = build(name, parameter)?;
        if rebuilt.page.to_json() != v["page"] {
            return Err(Error::ValidationFailed {
                name: name.into(),
                reason: "stored page does not match the rebuilt page".into(),
            });
        }
        let t = &rebuilt.page;
        let mut curves = BTreeMap::new();
        for (k, cv) in v["curves"]
            .as_object()
            .ok_or_else(|| Error::ValidationFailed {
                name: name.into(),
                reason: "missing curves".into(),
            })?
        {
            curves.insert(k.clone(), Curve::from_json(t, cv)?);
        }
        let mut factorizations = BTreeMap::new();
        for (k, fv) in v["factorizations"]
            .as_object()
            .ok_or_else(|| Error::ValidationFailed {
                name: name.into(),
                reason: "missing factorizations".into(),
            })?
        {
            factorizations.insert(k.clone(), Factorization::from_json(t, fv)?);
        }
        let script = match &v["script"] {
            Value::Null => None,
            sv => Some(MoveScript::from_json(t, sv)?),
        };
        Ok(NamedFamily {
            name: name.into(),
            parameter,
            page: rebuilt.page,
            curves,
            factorizations,
            script,
        })
    }
}

/// Build a named family and run its self-validation.
pub fn build(name: &str, parameter: usize) -> Result<NamedFamily> {
    match name {
        "vhm-3holed" => vhm3(parameter),
        "vhm-4holed" => vhm4(parameter),
        "thm-ope" => thm_ope(parameter),
        "thm-ope2" => thm_ope2(parameter),
        "thm-g+2" => thm_gplus2(parameter),
        "stabilized-g" => stabilized(parameter),
        _ => Err(Error::UnknownName { name: name.into() }),
    }
}

pub(crate) fn build_chart(v: &Value) -> Result<Chart> {
    Ok(ChartBundle::from_value(v)?.build()?)
}

fn fail(name: &str, reason: String) -> Error {
    Error::ValidationFailed {
        name: name.into(),
        reason,
    }
}

fn require_parameter(name: &str, parameter: usize, expected: usize) -> Result<()> {
    if parameter != expected {
        return Err(Error::UnsupportedParameter {
            name: name.into(),
            parameter,
            detail: format!("this family is a single surface; use parameter {expected}"),
        });
    }
    Ok(())
}

fn require_positive(name: &str, parameter: usize) -> Result<()> {
    if parameter == 0 {
        return Err(Error::UnsupportedParameter {
            name: name.into(),
            parameter,
            detail: "the parameter counts handles and must be at least 1".into(),
        });
    }
    Ok(())
}

/// Classification check shared by all builders.
fn check_class(name: &str, t: &Triangulation, genus: usize, boundary: usize) -> Result<()> {
    let c = classify(t);
    if c.genus != genus || c.boundary_components != boundary {
        return Err(fail(
            name,
            format!(
                "expected surface ({genus}, {boundary}), built ({}, {})",
                c.genus, c.boundary_components
            ),
        ));
    }
    Ok(())
}

/// Check a table of geometric intersection numbers.
fn check_intersections(
    name: &str,
    t: &Triangulation,
    curves: &BTreeMap<String, Curve>,
    table: &[(&str, &str, u64)],
) -> Result<()> {
    for &(a, b, expected) in table {
        let ca = curves
            .get(a)
            .ok_or_else(|| fail(name, format!("missing curve {a}")))?;
        let cb = curves
            .get(b)
            .ok_or_else(|| fail(name, format!("missing curve {b}")))?;
        let got = curves::geometric_intersection(t, ca, cb)?;
        if got != expected {
            return Err(fail(
                name,
                format!("i({a}, {b}) = {got}, expected {expected}"),
            ));
        }
    }
    Ok(())
}

/// Check that the listed curves are boundary-parallel to pairwise distinct
/// boundary components and that all other listed curves are essential and
/// not boundary-parallel.
fn check_boundary_roles(
    name: &str,
    t: &Triangulation,
    curves: &BTreeMap<String, Curve>,
    collars: &[&str],
    essential: &[&str],
) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for &cn in collars {
        let c = curves
            .get(cn)
            .ok_or_else(|| fail(name, format!("missing curve {cn}")))?;
        match curves::is_boundary_parallel(t, c)? {
            Some(comp) => {
                if !seen.insert(comp) {
                    return Err(fail(
                        name,
                        format!("{cn} duplicates boundary component {comp}"),
                    ));
                }
            }
            None => return Err(fail(name, format!("{cn} is not boundary-parallel"))),
        }
    }
    for &cn in essential {
        let c = curves
            .get(cn)
            .ok_or_else(|| fail(name, format!("missing curve {cn}")))?;
        if c.is_trivial() {
            return Err(fail(name, format!("{cn} bounds a disk")));
        }
        if curves::is_boundary_parallel(t, c)?.is_some() {
            return Err(fail(name, format!("{cn} is boundary-parallel")));
        }
    }
    Ok(())
}

/// Positive twist word along each named curve, display order.
pub fn twist_word(t: &Triangulation, curves: &[&Curve]) -> Result<Word> {
    let words = curves
        .iter()
        .map(|c| Word::twist(t, c, 1))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let refs: Vec<&Word> = words.iter().collect();
    Ok(Word::concat(t, &refs)?)
}

/// The three-holed torus with the star-relation configuration and the
/// three-twist factorization of the vertical-Morse monodromy.
fn vhm3(parameter: usize) -> Result<NamedFamily> {
    let name = "vhm-3holed";
    require_parameter(name, parameter, 1)?;
    let chart = build_chart(&charts::vhm3_bundle())?;
    let t = chart.triangulation;
    let mut curves = chart.curves;

    let tw = {
        let a1 = &curves["a1"];
        let a2 = &curves["a2"];
        let a3 = &curves["a3"];
        twist_word(&t, &[a1, a2, a3])?
    };
    let u0 = mcg::apply(&t, &tw.inverse(), &curves["b"])?;
    let u2 = mcg::apply(&t, &tw, &curves["b"])?;
    curves.insert("u0".into(), u0.clone());
    curves.insert("u2".into(), u2.clone());

    let psi1 = Factorization::from_display(&t, &[u0, curves["b"].clone(), u2])?;
    let mut factorizations = BTreeMap::new();
    factorizations.insert("psi1".into(), psi1);

    check_class(name, &t, 1, 3)?;
    check_boundary_roles(
        name,
        &t,
        &curves,
        &["delta1", "delta2", "delta3"],
        &["a1", "a2", "a3", "b", "u0", "u2"],
    )?;
    check_intersections(
        name,
        &t,
        &curves,
        &[
            ("a1", "a2", 0),
            ("a1", "a3", 0),
            ("a2", "a3", 0),
            ("a1", "b", 1),
            ("a2", "b", 1),
            ("a3", "b", 1),
            ("a1", "delta1", 0),
            ("a2", "delta2", 0),
            ("a3", "delta3", 0),
            ("b", "delta1", 0),
            ("b", "delta2", 0),
            ("b", "delta3", 0),
            ("u0", "b", 3),
            ("u2", "b", 3),
            ("u0", "u2", 6),
            ("u0", "a1", 1),
            ("u2", "a1", 1),
            ("u0", "delta1", 0),
            ("u2", "delta2", 0),
        ],
    )?;

    Ok(NamedFamily {
        name: name.into(),
        parameter,
        page: t,
        curves,
        factorizations,
        script: None,
    })
}

/// The four-holed torus with the chain-type relation configuration, the
/// four-twist factorization `phi1` of the vertical Morse monodromy, and its
/// Hurwitz-equivalent form `phi1tilde`.
///
/// With `A = D(a1)D(a3)` and `B = D(a2)D(a4)` (commuting, as the four
/// verticals are disjoint) the stored curve images are
/// `c1 = B^-1(b)`, `c3 = B^-1 A(b)`, `c4 = A(b)`, `e2 = A^-1 B^-1(b)`,
/// `e1 = A^-1 B^-2(b)`; `phi1 = [c1, b, c3, c4]` and
/// `phi1tilde = [e1, e2, c1, b]` in display order.
fn vhm4(parameter: usize) -> Result<NamedFamily> {
    let name = "vhm-4holed";
    require_parameter(name, parameter, 1)?;
    let chart = build_chart(&charts::vhm4_bundle())?;
    let t = chart.triangulation;
    let mut curves = chart.curves;

    let (aw, bw) = {
        let a1 = &curves["a1"];
        let a2 = &curves["a2"];
        let a3 = &curves["a3"];
        let a4 = &curves["a4"];
        (twist_word(&t, &[a1, a3])?, twist_word(&t, &[a2, a4])?)
    };
    let (ai, bi) = (aw.inverse(), bw.inverse());
    let b = curves["b"].clone();
    let c1 = mcg::apply(&t, &bi, &b)?;
    let c4 = mcg::apply(&t, &aw, &b)?;
    let c3 = mcg::apply(&t, &bi, &c4)?;
    let e2 = mcg::apply(&t, &ai, &c1)?;
    let e1 = mcg::apply(&t, &ai, &mcg::apply(&t, &bi, &c1)?)?;
    curves.insert("c1".into(), c1.clone());
    curves.insert("c3".into(), c3.clone());
    curves.insert("c4".into(), c4.clone());
    curves.insert("e1".into(), e1.clone());
    curves.insert("e2".into(), e2.clone());

    let phi1 = Factorization::from_display(&t, &[c1.clone(), b.clone(), c3, c4])?;
    let phi1tilde = Factorization::from_display(&t, &[e1, e2, c1, b])?;
    let mut factorizations = BTreeMap::new();
    factorizations.insert("phi1".into(), phi1);
    factorizations.insert("phi1tilde".into(), phi1tilde);

    check_class(name, &t, 1, 4)?;
    check_boundary_roles(
        name,
        &t,
        &curves,
        &["delta1", "delta2", "delta3", "delta4"],
        &["a1", "a2", "a3", "a4", "b", "c1", "c3", "c4", "e1", "e2"],
    )?;
    let mut table: Vec<(&str, &str, u64)> = vec![
        ("a1", "a2", 0),
        ("a1", "a3", 0),
        ("a1", "a4", 0),
        ("a2", "a3", 0),
        ("a2", "a4", 0),
        ("a3", "a4", 0),
        ("a1", "b", 1),
        ("a2", "b", 1),
        ("a3", "b", 1),
        ("a4", "b", 1),
    ];
    // The twists defining the c and e curves are supported away from the
    // boundary collars, so every named curve stays disjoint from every delta.
    for cn in ["a1", "a2", "a3", "a4", "b", "c1", "c3", "c4", "e1", "e2"] {
        for dn in ["delta1", "delta2", "delta3", "delta4"] {
            table.push((cn, dn, 0));
        }
    }
    check_intersections(name, &t, &curves, &table)?;

    Ok(NamedFamily {
        name: name.into(),
        parameter,
        page: t,
        curves,
        factorizations,
        script: None,
    })
}

/// The genus-g rectangle page with the surgery triple and the positive
/// factorization `phi = D(v0) D(v1_1) .. D(v1_2g) D(v2)`.
fn thm_ope(parameter: usize) -> Result<NamedFamily> {
    let name = "thm-ope";
    require_positive(name, parameter)?;
    let g = parameter;
    let chart = build_chart(&charts::ope_bundle(g))?;
    let t = chart.triangulation;
    let curves = chart.curves;

    let mut display = vec![curves["v0"].clone()];
    for j in 1..=2 * g {
        display.push(curves[&format!("v1_{j}")].clone());
    }
    display.push(curves["v2"].clone());
    let phi = Factorization::from_display(&t, &display)?;
    let mut factorizations = BTreeMap::new();
    factorizations.insert("phi".into(), phi);

    check_class(name, &t, g, 2 * g + 2)?;
    let names: Vec<String> = curves.keys().cloned().collect();
    let essential: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    check_boundary_roles(name, &t, &curves, &[], &essential)?;
    let mut table: Vec<(String, String, u64)> = Vec::new();
    for j in 1..=2 * g {
        table.push(("v0".into(), format!("v1_{j}"), 2));
        table.push((format!("v1_{j}"), "v2".into(), 2));
        for l in j + 1..=2 * g {
            table.push((format!("v1_{j}"), format!("v1_{l}"), 0));
        }
    }
    table.push(("v0".into(), "v2".into(), 4 * g as u64));
    let refs: Vec<(&str, &str, u64)> = table
        .iter()
        .map(|(a, b, n)| (a.as_str(), b.as_str(), *n))
        .collect();
    check_intersections(name, &t, &curves, &refs)?;

    Ok(NamedFamily {
        name: name.into(),
        parameter,
        page: t,
        curves,
        factorizations,
        script: None,
    })
}

/// The k-handle rectangle page with the surgery triple and the positive
/// factorization `phi = D(v0) D(v1_1) .. D(v1_k) D(v2)`.
fn thm_ope2(parameter: usize) -> Result<NamedFamily> {
    let name = "thm-ope2";
    require_positive(name, parameter)?;
    let k = parameter;
    let chart = build_chart(&charts::ope2_bundle(k))?;
    let t = chart.triangulation;
    let curves = chart.curves;

    let mut display = vec![curves["v0"].clone()];
    for i in 1..=k {
        display.push(curves[&format!("v1_{i}")].clone());
    }
    display.push(curves["v2"].clone());
    let phi = Factorization::from_display(&t, &display)?;
    let mut factorizations = BTreeMap::new();
    factorizations.insert("phi".into(), phi);

    check_class(name, &t, 0, 2 * k + 2)?;
    let names: Vec<String> = curves.keys().cloned().collect();
    let essential: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    check_boundary_roles(name, &t, &curves, &[], &essential)?;
    let mut table: Vec<(String, String, u64)> = Vec::new();
    for i in 1..=k {
        table.push(("v0".into(), format!("v1_{i}"), 2));
        table.push((format!("v1_{i}"), "v2".into(), 2));
        for l in i + 1..=k {
            table.push((format!("v1_{i}"), format!("v1_{l}"), 0));
        }
    }
    table.push(("v0".into(), "v2".into(), 2 * k as u64));
    let refs: Vec<(&str, &str, u64)> = table
        .iter()
        .map(|(a, b, n)| (a.as_str(), b.as_str(), *n))
        .collect();
    check_intersections(name, &t, &curves, &refs)?;

    Ok(NamedFamily {
        name: name.into(),
        parameter,
        page: t,
        curves,
        factorizations,
        script: None,
    })
}

/// The chained page of genus g with g + 2 boundary components: g copies of
/// the three-holed torus block glued in a cycle along their third bands,
/// carrying the staircase curves `u0`, `u2`, the per-block horizontals
/// `u1_1 .. u1_g`, and the factorization
/// `psi = D(u0) D(u1_1) .. D(u1_g) D(u2)`.
///
/// At parameter 1 the chain closes a single block onto itself, so the page
/// coincides with the `vhm-3holed` page and the staircases must be isotopic
/// to the twist images defining that family's `u0` and `u2`.
fn thm_gplus2(parameter: usize) -> Result<NamedFamily> {
    let name = "thm-g+2";
    require_positive(name, parameter)?;
    let g = parameter;
    let chart = build_chart(&charts::gplus2_bundle(g))?;
    let t = chart.triangulation;
    let curves = chart.curves;

    let mut display = vec![curves["u0"].clone()];
    for j in 1..=g {
        display.push(curves[&format!("u1_{j}")].clone());
    }
    display.push(curves["u2"].clone());
    let psi = Factorization::from_display(&t, &display)?;
    let mut factorizations = BTreeMap::new();
    factorizations.insert("psi".into(), psi);

    check_class(name, &t, g, g + 2)?;
    let collars: Vec<String> = (1..=g).map(|j| format!("delta{j}")).collect();
    let collar_refs: Vec<&str> = collars.iter().map(|s| s.as_str()).collect();
    let mut essential: Vec<String> = vec!["u0".into(), "u2".into()];
    for j in 1..=g {
        essential.push(format!("u1_{j}"));
    }
    let essential_refs: Vec<&str> = essential.iter().map(|s| s.as_str()).collect();
    check_boundary_roles(name, &t, &curves, &collar_refs, &essential_refs)?;

    let mut table: Vec<(String, String, u64)> = Vec::new();
    for j in 1..=g {
        table.push(("u0".into(), format!("u1_{j}"), 3));
        table.push((format!("u1_{j}"), "u2".into(), 3));
        for l in j + 1..=g {
            table.push((format!("u1_{j}"), format!("u1_{l}"), 0));
        }
        for d in &collars {
            table.push((format!("u1_{j}"), d.clone(), 0));
        }
    }
    for d in &collars {
        table.push(("u0".into(), d.clone(), 0));
        table.push(("u2".into(), d.clone(), 0));
    }
    // The u0-u2 count grows with g and its twist-growth computation is the
    // one expensive row, so it is only checked where it is cheap; the
    // one-block agreement with vhm-3holed pins the local picture anyway.
    if g <= 2 {
        table.push(("u0".into(), "u2".into(), 6 * g as u64));
    }
    let refs: Vec<(&str, &str, u64)> = table
        .iter()
        .map(|(a, b, n)| (a.as_str(), b.as_str(), *n))
        .collect();
    check_intersections(name, &t, &curves, &refs)?;

    Ok(NamedFamily {
        name: name.into(),
        parameter,
        page: t,
        curves,
        factorizations,
        script: None,
    })
}

fn stabilized(parameter: usize) -> Result<NamedFamily> {
    let name = "stabilized-g";
    require_positive(name, parameter)?;
    Err(fail(name, "not yet assembled".into()))
}
