//! Ordered positive factorizations, elementary Hurwitz moves, open books,
//! and positive stabilization.
//!
//! A [`Factorization`] stores its tuple (d1, ..., dk) so that the total
//! monodromy is D(dk)...D(d1): the first stored cycle acts first.  Displayed
//! products read left to right with the rightmost factor acting first, so a
//! displayed product corresponds to the reversed stored tuple; use
//! [`Factorization::from_display`] when transcribing one.
//!
//! Hurwitz moves, cyclic permutation, and global conjugation are the
//! monodromy-preserving (or conjugating) rewrites of the tuple.  Proof
//! scripts are explicit sequences of such moves plus audited isotopy
//! substitutions; [`run_script`] replays one and produces a per-step report.
//! Positive stabilization attaches a quadrilateral 1-handle to the page
//! along two boundary segments at a properly embedded arc's endpoints and
//! inserts the twist about the arc joined with the handle's core circle.

use std::time::Instant;

use crate::curves::{self, Curve, CurveKind, Port, Seg};
use crate::error::{Error, Result};
use crate::invariants::{self, Mat};
use crate::mcg::{self, Atom, Word};
use crate::surface::{Edge, TriSide, Triangle, Triangulation};

/// An ordered tuple of essential closed curves on a fixed page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub page: String,
    pub cycles: Vec<Curve>,
}

impl Factorization {
    /// Build from the stored order (first cycle acts first).
    pub fn new(t: &Triangulation, cycles: Vec<Curve>) -> Result<Factorization> {
        let mut normd = Vec::with_capacity(cycles.len());
        for c in &cycles {
            if c.page != t.hash() {
                return Err(Error::PageMismatch);
            }
            if c.kind != CurveKind::Closed {
                return Err(Error::InvalidSpec {
                    reason: "factorization cycles must be closed curves".into(),
                });
            }
            let n = curves::normalize(t, c)?;
            if n.is_trivial() {
                return Err(Error::TrivialTwistCurve);
            }
            normd.push(n);
        }
        Ok(Factorization {
            page: t.hash().to_string(),
            cycles: normd,
        })
    }

    /// Build from a displayed product D(c1)D(c2)...D(ck) read left to
    /// right; the stored tuple is the reverse.
    pub fn from_display(t: &Triangulation, display: &[Curve]) -> Result<Factorization> {
        let cycles: Vec<Curve> = display.iter().rev().cloned().collect();
        Factorization::new(t, cycles)
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// The cycles in displayed order (leftmost factor first).
    pub fn display_cycles(&self) -> Vec<Curve> {
        self.cycles.iter().rev().cloned().collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "page": self.page,
            "cycles": self.cycles.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(t: &Triangulation, v: &serde_json::Value) -> Result<Factorization> {
        let bad = |reason: &str| Error::InvalidSpec {
            reason: format!("factorization JSON: {reason}"),
        };
        let page = v["page"].as_str().ok_or_else(|| bad("missing page"))?;
        if page != t.hash() {
            return Err(Error::PageMismatch);
        }
        let mut cycles = Vec::new();
        for item in v["cycles"].as_array().ok_or_else(|| bad("missing cycles"))? {
            cycles.push(Curve::from_json(t, item)?);
        }
        Factorization::new(t, cycles)
    }

    pub fn canonical_hash(&self) -> String {
        crate::canonical_json_sha256(&self.to_json())
    }
}

/// The word D(dk)...D(d1) of the stored tuple (d1, ..., dk).
pub fn total_monodromy(t: &Triangulation, f: &Factorization) -> Result<Word> {
    if f.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    let atoms = f
        .cycles
        .iter()
        .rev()
        .map(|c| Atom {
            curve: c.clone(),
            sign: 1,
        })
        .collect();
    Word::new(t, atoms)
}

/// Induced H1 action of the total monodromy.
pub fn monodromy_matrix(t: &Triangulation, f: &Factorization) -> Result<Mat> {
    mcg::induced_h1_matrix(t, &total_monodromy(t, f)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HurwitzDirection {
    Forward,
    Inverse,
}

/// The elementary Hurwitz move at stored index `i`:
/// forward  (di, di+1) -> (di+1, D(di+1)(di)),
/// inverse  (di, di+1) -> (D(di)^{-1}(di+1), di).
/// Both preserve the total monodromy exactly.
pub fn hurwitz_move(
    t: &Triangulation,
    f: &Factorization,
    i: usize,
    direction: HurwitzDirection,
) -> Result<Factorization> {
    if f.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    if i + 1 >= f.cycles.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: f.cycles.len(),
        });
    }
    let mut cycles = f.cycles.clone();
    match direction {
        HurwitzDirection::Forward => {
            let w = Word::twist(t, &cycles[i + 1], 1)?;
            let moved = mcg::apply(t, &w, &cycles[i])?;
            cycles.swap(i, i + 1);
            cycles[i + 1] = moved;
        }
        HurwitzDirection::Inverse => {
            let w = Word::twist(t, &cycles[i], -1)?;
            let moved = mcg::apply(t, &w, &cycles[i + 1])?;
            cycles.swap(i, i + 1);
            cycles[i] = moved;
        }
    }
    Factorization::new(t, cycles)
}

/// Rotate the stored tuple left by `k`: (d1, ..., dk, ...) sends the first
/// `k` cycles to the back.  The total monodromy changes by conjugation with
/// D(dk)...D(d1).
pub fn cyclic_permute(t: &Triangulation, f: &Factorization, k: usize) -> Result<Factorization> {
    if f.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    if f.cycles.is_empty() {
        return Factorization::new(t, Vec::new());
    }
    let k = k % f.cycles.len();
    let mut cycles = f.cycles.clone();
    cycles.rotate_left(k);
    Factorization::new(t, cycles)
}

/// Replace every cycle by its image under `w`; the total monodromy becomes
/// w (total) w^{-1}.
pub fn global_conjugate(t: &Triangulation, f: &Factorization, w: &Word) -> Result<Factorization> {
    if f.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    let cycles = f
        .cycles
        .iter()
        .map(|c| mcg::apply(t, w, c))
        .collect::<Result<Vec<_>>>()?;
    Factorization::new(t, cycles)
}

/// A page together with a positive factorization of its monodromy.
#[derive(Debug, Clone)]
pub struct OpenBook {
    pub page: Triangulation,
    pub factorization: Factorization,
}

impl OpenBook {
    pub fn new(page: Triangulation, factorization: Factorization) -> Result<OpenBook> {
        if factorization.page != page.hash() {
            return Err(Error::PageMismatch);
        }
        Ok(OpenBook {
            page,
            factorization,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "page": self.page.to_json(),
            "factorization": self.factorization.to_json(),
        })
    }
}

/// Where the stabilizing twist lands in the stored tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizePosition {
    /// Stored-tuple front: the new twist acts first (displayed product is
    /// multiplied on the right).
    Prepend,
    /// Stored-tuple back: the new twist acts last.
    Append,
}

/// Positive stabilization along a properly embedded arc.
///
/// A quadrilateral (two triangles with the diagonal at the arc's first
/// endpoint) is glued along the outgoing boundary edges at the arc's two
/// endpoint vertices; the new curve is the arc joined with the handle's
/// core circle, realized by sliding each arc end off its vertex, sweeping
/// through the vertex fan to the glued boundary edge, and crossing the
/// handle.
pub fn stabilize(ob: &OpenBook, arc: &Curve, position: StabilizePosition) -> Result<OpenBook> {
    let t = &ob.page;
    if arc.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    if arc.kind != CurveKind::Arc {
        return Err(Error::ArcEndpointsNotOnBoundary);
    }
    let arc = curves::normalize(t, arc).map_err(|e| match e {
        Error::NotEmbedded { reason } => Error::ArcNotEmbedded { reason },
        other => other,
    })?;
    let ends = arc.endpoints.expect("arcs carry endpoints");
    let (v1, v2) = (ends[0], ends[1]);
    if v1 == v2 {
        return Err(Error::ArcNotEmbedded {
            reason: "stabilization arc must join two distinct boundary vertices".into(),
        });
    }
    let b1 = t.fan(v1).boundary_out;
    let b2 = t.fan(v2).boundary_out;
    let y1 = t.edges[b1].to;
    let y2 = t.edges[b2].to;

    let mut triangles = t.triangles.clone();
    let mut edges = t.edges.clone();
    let qt0 = triangles.len();
    let qt1 = qt0 + 1;
    let d = edges.len();
    let f1 = d + 1;
    let f2 = d + 2;
    // Quad corners in ccw order are [y1, v1, y2, v2]; the glued sides b1 and
    // b2 are traversed backward (the surface already holds their forward
    // incidence), and the diagonal runs v1 -> v2.
    edges.push(Edge {
        from: v1,
        to: v2,
        left: (qt0, 1),
        right: Some((qt1, 2)),
    });
    edges.push(Edge {
        from: v1,
        to: y2,
        left: (qt1, 0),
        right: None,
    });
    edges.push(Edge {
        from: v2,
        to: y1,
        left: (qt0, 2),
        right: None,
    });
    edges[b1].right = Some((qt0, 0));
    edges[b2].right = Some((qt1, 1));
    triangles.push(Triangle {
        corners: [y1, v1, v2],
        sides: [
            TriSide {
                edge: b1,
                forward: false,
            },
            TriSide {
                edge: d,
                forward: true,
            },
            TriSide {
                edge: f2,
                forward: true,
            },
        ],
    });
    triangles.push(Triangle {
        corners: [v1, y2, v2],
        sides: [
            TriSide {
                edge: f1,
                forward: true,
            },
            TriSide {
                edge: b2,
                forward: false,
            },
            TriSide {
                edge: d,
                forward: false,
            },
        ],
    });
    let new_t =
        Triangulation::from_parts(triangles, edges, t.vertices.len(), t.provenance.clone())?;

    // beta' = arc + handle core.  The old fans at v1 and v2 are still valid
    // piecewise data on the new page: their entries and interior edges are
    // untouched; only the boundary edges b1, b2 became interior.
    let mut segs = arc.segs.clone();
    let last = segs.len() - 1;
    let (tf, tl) = (segs[0].tri, segs[last].tri);
    let (k1, k2) = match (segs[0].enter, segs[last].exit) {
        (Port::Corner(a), Port::Corner(b)) => (a, b),
        _ => unreachable!("normalized arcs end at corners"),
    };
    segs[0].enter = Port::Side(k1);
    segs[last].exit = Port::Side(k2);
    // Sweep around v2 from the arc's exit corner to b2.
    let fan2 = t.fan(v2);
    let p2 = fan2
        .triangles
        .iter()
        .position(|&(tt, cc)| tt == tl && cc == k2)
        .expect("arc endpoint corner is in its vertex fan");
    for &(tt, cc) in &fan2.triangles[p2 + 1..] {
        segs.push(Seg {
            tri: tt,
            enter: Port::Side((cc + 2) % 3),
            exit: Port::Side(cc),
        });
    }
    // Handle core: cross b2 into the quad, cut the corner at v2, cross the
    // diagonal, cut the corner at v1, and leave through b1.
    segs.push(Seg {
        tri: qt1,
        enter: Port::Side(1),
        exit: Port::Side(2),
    });
    segs.push(Seg {
        tri: qt0,
        enter: Port::Side(1),
        exit: Port::Side(0),
    });
    // Sweep around v1 from b1 back to the arc's entry corner.
    let fan1 = t.fan(v1);
    let p1 = fan1
        .triangles
        .iter()
        .position(|&(tt, cc)| tt == tf && cc == k1)
        .expect("arc endpoint corner is in its vertex fan");
    for &(tt, cc) in fan1.triangles[p1 + 1..].iter().rev() {
        segs.push(Seg {
            tri: tt,
            enter: Port::Side(cc),
            exit: Port::Side((cc + 2) % 3),
        });
    }
    let beta = curves::normalize(&new_t, &Curve::closed(&new_t, segs)?)?;

    // Old cycles include canonically: triangle and side indices are stable.
    let mut cycles: Vec<Curve> = ob
        .factorization
        .cycles
        .iter()
        .map(|c| Curve::closed(&new_t, c.segs.clone()))
        .collect::<Result<Vec<_>>>()?;
    match position {
        StabilizePosition::Prepend => cycles.insert(0, beta),
        StabilizePosition::Append => cycles.push(beta),
    }
    let f = Factorization::new(&new_t, cycles)?;
    OpenBook::new(new_t, f)
}

/// One step of a proof script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Hurwitz { index: usize },
    HurwitzInverse { index: usize },
    Cyclic { shift: usize },
    Conjugate { word: Word },
    /// Replace cycle `index` by `apply(word, source)` after checking the
    /// current cycle is isotopic to that image.
    RewriteConjugation {
        index: usize,
        word: Word,
        source: Curve,
    },
    /// Replace cycle `index` by `target` after checking isotopy.
    ReplaceIsotopic { index: usize, target: Curve },
}

impl Step {
    pub fn kind(&self) -> &'static str {
        match self {
            Step::Hurwitz { .. } => "hurwitz",
            Step::HurwitzInverse { .. } => "hurwitz_inverse",
            Step::Cyclic { .. } => "cyclic",
            Step::Conjugate { .. } => "conjugate",
            Step::RewriteConjugation { .. } => "rewrite_conjugation",
            Step::ReplaceIsotopic { .. } => "replace_isotopic",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Step::Hurwitz { index } => serde_json::json!({"kind": "hurwitz", "index": index}),
            Step::HurwitzInverse { index } => {
                serde_json::json!({"kind": "hurwitz_inverse", "index": index})
            }
            Step::Cyclic { shift } => serde_json::json!({"kind": "cyclic", "shift": shift}),
            Step::Conjugate { word } => {
                serde_json::json!({"kind": "conjugate", "word": word.to_json()})
            }
            Step::RewriteConjugation {
                index,
                word,
                source,
            } => serde_json::json!({
                "kind": "rewrite_conjugation",
                "index": index,
                "word": word.to_json(),
                "source": source.to_json(),
            }),
            Step::ReplaceIsotopic { index, target } => serde_json::json!({
                "kind": "replace_isotopic",
                "index": index,
                "target": target.to_json(),
            }),
        }
    }

    pub fn from_json(t: &Triangulation, v: &serde_json::Value) -> Result<Step> {
        let bad = |reason: &str| Error::InvalidSpec {
            reason: format!("script step JSON: {reason}"),
        };
        let kind = v["kind"].as_str().ok_or_else(|| bad("missing kind"))?;
        let index = || -> Result<usize> {
            Ok(v["index"].as_u64().ok_or_else(|| bad("missing index"))? as usize)
        };
        Ok(match kind {
            "hurwitz" => Step::Hurwitz { index: index()? },
            "hurwitz_inverse" => Step::HurwitzInverse { index: index()? },
            "cyclic" => Step::Cyclic {
                shift: v["shift"].as_u64().ok_or_else(|| bad("missing shift"))? as usize,
            },
            "conjugate" => Step::Conjugate {
                word: Word::from_json(t, &v["word"])?,
            },
            "rewrite_conjugation" => Step::RewriteConjugation {
                index: index()?,
                word: Word::from_json(t, &v["word"])?,
                source: Curve::from_json(t, &v["source"])?,
            },
            "replace_isotopic" => Step::ReplaceIsotopic {
                index: index()?,
                target: Curve::from_json(t, &v["target"])?,
            },
            other => return Err(bad(&format!("unknown kind {other}"))),
        })
    }
}

/// A sequence of script steps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MoveScript {
    pub steps: Vec<Step>,
}

impl MoveScript {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "steps": self.steps.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(t: &Triangulation, v: &serde_json::Value) -> Result<MoveScript> {
        let steps = v["steps"]
            .as_array()
            .ok_or_else(|| Error::InvalidSpec {
                reason: "script JSON: missing steps".into(),
            })?
            .iter()
            .map(|s| Step::from_json(t, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(MoveScript { steps })
    }
}

/// Outcome of one executed script step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub step: usize,
    pub kind: &'static str,
    pub before: String,
    pub after: String,
    pub ok: bool,
    pub detail: String,
    pub millis: u128,
}

/// Outcome of a whole script run.
#[derive(Debug, Clone)]
pub struct ScriptReport {
    pub verified: bool,
    pub start: String,
    pub target: String,
    pub final_state: String,
    pub final_matches_target: bool,
    pub steps: Vec<StepReport>,
}

impl ScriptReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verified": self.verified,
            "start": self.start,
            "target": self.target,
            "final_state": self.final_state,
            "final_matches_target": self.final_matches_target,
            "steps": self.steps.iter().map(|s| serde_json::json!({
                "step": s.step,
                "kind": s.kind,
                "before": s.before,
                "after": s.after,
                "ok": s.ok,
                "detail": s.detail,
                "millis": s.millis as u64,
            })).collect::<Vec<_>>(),
        })
    }

    /// Convert a refuted run into the corresponding error.
    pub fn as_result(&self) -> Result<()> {
        if self.verified {
            return Ok(());
        }
        if let Some(s) = self.steps.iter().find(|s| !s.ok) {
            return Err(Error::StepFailed {
                index: s.step,
                reason: s.detail.clone(),
            });
        }
        Err(Error::StepFailed {
            index: self.steps.len(),
            reason: "final state does not match the target".into(),
        })
    }
}

fn check_conjugated_matrix(m_old: &Mat, m_new: &Mat, m_w: &Mat) -> bool {
    invariants::mat_mul(m_new, m_w) == invariants::mat_mul(m_w, m_old)
}

/// Execute a script from `f_start`, checking every step, and compare the
/// result with `f_target` cycle by cycle.
pub fn run_script(
    t: &Triangulation,
    f_start: &Factorization,
    script: &MoveScript,
    f_target: &Factorization,
) -> Result<ScriptReport> {
    if f_start.page != t.hash() || f_target.page != t.hash() {
        return Err(Error::PageMismatch);
    }
    let mut cur = Factorization::new(t, f_start.cycles.clone())?;
    let mut steps = Vec::new();
    let mut all_ok = true;
    for (si, step) in script.steps.iter().enumerate() {
        let before = cur.canonical_hash();
        let t0 = Instant::now();
        let mut ok = true;
        let mut detail = String::new();
        let next = match step {
            Step::Hurwitz { index } => {
                let m_old = monodromy_matrix(t, &cur)?;
                let next = hurwitz_move(t, &cur, *index, HurwitzDirection::Forward)?;
                if monodromy_matrix(t, &next)? != m_old {
                    ok = false;
                    detail = "total monodromy H1 action changed".into();
                }
                next
            }
            Step::HurwitzInverse { index } => {
                let m_old = monodromy_matrix(t, &cur)?;
                let next = hurwitz_move(t, &cur, *index, HurwitzDirection::Inverse)?;
                if monodromy_matrix(t, &next)? != m_old {
                    ok = false;
                    detail = "total monodromy H1 action changed".into();
                }
                next
            }
            Step::Cyclic { shift } => {
                let m_old = monodromy_matrix(t, &cur)?;
                let k = if cur.cycles.is_empty() {
                    0
                } else {
                    *shift % cur.cycles.len()
                };
                let prefix = Factorization::new(t, cur.cycles[..k].to_vec())?;
                let m_w = monodromy_matrix(t, &prefix)?;
                let next = cyclic_permute(t, &cur, *shift)?;
                if !check_conjugated_matrix(&m_old, &monodromy_matrix(t, &next)?, &m_w) {
                    ok = false;
                    detail = "cyclic permutation is not a conjugation on H1".into();
                }
                next
            }
            Step::Conjugate { word } => {
                let m_old = monodromy_matrix(t, &cur)?;
                let m_w = mcg::induced_h1_matrix(t, word)?;
                let next = global_conjugate(t, &cur, word)?;
                if !check_conjugated_matrix(&m_old, &monodromy_matrix(t, &next)?, &m_w) {
                    ok = false;
                    detail = "global conjugation is not a conjugation on H1".into();
                }
                next
            }
            Step::RewriteConjugation {
                index,
                word,
                source,
            } => {
                if *index >= cur.cycles.len() {
                    return Err(Error::IndexOutOfRange {
                        index: *index,
                        len: cur.cycles.len(),
                    });
                }
                let image = mcg::apply(t, word, source)?;
                if !curves::is_isotopic(t, &cur.cycles[*index], &image)? {
                    ok = false;
                    detail = format!(
                        "cycle {index} is not isotopic to the conjugated source"
                    );
                    cur.clone()
                } else {
                    let mut cycles = cur.cycles.clone();
                    cycles[*index] = image;
                    Factorization::new(t, cycles)?
                }
            }
            Step::ReplaceIsotopic { index, target } => {
                if *index >= cur.cycles.len() {
                    return Err(Error::IndexOutOfRange {
                        index: *index,
                        len: cur.cycles.len(),
                    });
                }
                let target_n = curves::normalize(t, target)?;
                if !curves::is_isotopic(t, &cur.cycles[*index], &target_n)? {
                    ok = false;
                    detail = format!("cycle {index} is not isotopic to the target");
                    cur.clone()
                } else {
                    let mut cycles = cur.cycles.clone();
                    cycles[*index] = target_n;
                    Factorization::new(t, cycles)?
                }
            }
        };
        let millis = t0.elapsed().as_millis();
        cur = next;
        steps.push(StepReport {
            step: si,
            kind: step.kind(),
            before,
            after: cur.canonical_hash(),
            ok,
            detail,
            millis,
        });
        if !ok {
            all_ok = false;
            break;
        }
    }
    let mut final_matches = all_ok && cur.cycles.len() == f_target.cycles.len();
    if final_matches {
        let target = Factorization::new(t, f_target.cycles.clone())?;
        for (a, b) in cur.cycles.iter().zip(target.cycles.iter()) {
            if a != b {
                final_matches = false;
                break;
            }
        }
    }
    Ok(ScriptReport {
        verified: all_ok && final_matches,
        start: f_start.canonical_hash(),
        target: f_target.canonical_hash(),
        final_state: cur.canonical_hash(),
        final_matches_target: final_matches,
        steps,
    })
}

/// Bounded breadth-first search for a Hurwitz-move script from `f` to
/// `target` (forward and inverse moves only).  Returns None when no script
/// of at most `budget` moves exists or the frontier exceeds the budgeted
/// node count.
pub fn hurwitz_search(
    t: &Triangulation,
    f: &Factorization,
    target: &Factorization,
    budget: usize,
) -> Result<Option<MoveScript>> {
    use std::collections::{BTreeSet, VecDeque};
    // Cycles inside a Factorization are already normalized, so hashing
    // their JSON directly is canonical.
    let state_key = |f: &Factorization| -> Vec<String> {
        f.cycles
            .iter()
            .map(|c| crate::canonical_json_sha256(&c.to_json()))
            .collect()
    };
    let start = Factorization::new(t, f.cycles.clone())?;
    let goal = state_key(&Factorization::new(t, target.cycles.clone())?);
    if state_key(&start) == goal {
        return Ok(Some(MoveScript::default()));
    }
    let max_nodes = 20_000usize;
    let mut queue = VecDeque::new();
    queue.push_back((start.clone(), Vec::<Step>::new()));
    let mut visited = BTreeSet::new();
    visited.insert(state_key(&start));
    let mut expanded = 0usize;
    while let Some((cur, path)) = queue.pop_front() {
        if path.len() >= budget {
            continue;
        }
        expanded += 1;
        if expanded > max_nodes {
            return Ok(None);
        }
        for i in 0..cur.cycles.len().saturating_sub(1) {
            for dir in [HurwitzDirection::Forward, HurwitzDirection::Inverse] {
                let next = hurwitz_move(t, &cur, i, dir)?;
                let key = state_key(&next);
                if !visited.insert(key.clone()) {
                    continue;
                }
                let step = match dir {
                    HurwitzDirection::Forward => Step::Hurwitz { index: i },
                    HurwitzDirection::Inverse => Step::HurwitzInverse { index: i },
                };
                let mut next_path = path.clone();
                next_path.push(step);
                if key == goal {
                    return Ok(Some(MoveScript { steps: next_path }));
                }
                queue.push_back((next, next_path));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{
        build_surface, classify, GluingDirection, Identification, PolygonDecl, PolygonSpec,
        SideRef,
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

    fn disk() -> Triangulation {
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "sq".into(),
                sides: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            }],
            identifications: vec![],
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
        curves::normalize(t, &Curve::closed(t, segs).unwrap()).unwrap()
    }

    #[test]
    fn display_order_reverses_storage() {
        let t = annulus();
        let x = core(&t);
        let f = Factorization::from_display(&t, &[x.clone(), x.clone()]).unwrap();
        assert_eq!(f.cycles.len(), 2);
        let w = total_monodromy(&t, &f).unwrap();
        assert_eq!(w.atoms.len(), 2);
        assert!(w.atoms.iter().all(|a| a.sign == 1));
    }

    #[test]
    fn empty_factorization_has_identity_monodromy() {
        let t = annulus();
        let f = Factorization::new(&t, vec![]).unwrap();
        let w = total_monodromy(&t, &f).unwrap();
        assert!(mcg::is_identity(&t, &w).unwrap());
    }

    #[test]
    fn hurwitz_move_preserves_monodromy_and_inverts() {
        let t = annulus();
        let x = core(&t);
        let collar = curves::boundary_collar(&t, 0).unwrap();
        let f = Factorization::new(&t, vec![x.clone(), collar.clone()]).unwrap();
        let g = hurwitz_move(&t, &f, 0, HurwitzDirection::Forward).unwrap();
        let wa = total_monodromy(&t, &f).unwrap();
        let wb = total_monodromy(&t, &g).unwrap();
        assert!(mcg::equal(&t, &wa, &wb).unwrap());
        let back = hurwitz_move(&t, &g, 0, HurwitzDirection::Inverse).unwrap();
        assert_eq!(back, f);
        match hurwitz_move(&t, &f, 1, HurwitzDirection::Forward) {
            Err(Error::IndexOutOfRange { .. }) => {}
            other => panic!("expected IndexOutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn cyclic_permutation_conjugates() {
        let t = annulus();
        let x = core(&t);
        let collar = curves::boundary_collar(&t, 1).unwrap();
        let f = Factorization::new(&t, vec![x.clone(), collar.clone()]).unwrap();
        let g = cyclic_permute(&t, &f, 1).unwrap();
        assert_eq!(g.cycles[0], f.cycles[1]);
        assert_eq!(g.cycles[1], f.cycles[0]);
        // On the annulus all twists commute, so the monodromy is unchanged.
        let wa = total_monodromy(&t, &f).unwrap();
        let wb = total_monodromy(&t, &g).unwrap();
        assert!(mcg::equal(&t, &wa, &wb).unwrap());
    }

    #[test]
    fn disk_stabilization_gives_annulus_open_book() {
        let t = disk();
        // Any corner-to-corner chord of the square is a trivial
        // boundary-to-boundary arc; take the diagonal of triangle 0.
        let arc = Curve::arc(
            &t,
            vec![Seg {
                tri: 0,
                enter: Port::Corner(0),
                exit: Port::Corner(2),
            }],
        )
        .unwrap();
        let ob = OpenBook::new(t.clone(), Factorization::new(&t, vec![]).unwrap()).unwrap();
        let st = stabilize(&ob, &arc, StabilizePosition::Append).unwrap();
        let cls = classify(&st.page);
        assert_eq!(cls.genus, 0);
        assert_eq!(cls.boundary_components, 2);
        assert_eq!(cls.euler, 0);
        assert_eq!(st.factorization.cycles.len(), 1);
        let beta = &st.factorization.cycles[0];
        // The new twist curve is the core of the annulus.
        assert_eq!(
            curves::is_boundary_parallel(&st.page, beta).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn stabilization_carries_old_cycles_over() {
        let t = annulus();
        let x = core(&t);
        let f = Factorization::new(&t, vec![x.clone()]).unwrap();
        let ob = OpenBook::new(t.clone(), f).unwrap();
        let arc = curves::edge_parallel_arc(&t, 3).unwrap();
        let st = stabilize(&ob, &arc, StabilizePosition::Prepend).unwrap();
        let cls = classify(&st.page);
        assert_eq!(cls.euler, -1);
        assert_eq!(st.factorization.cycles.len(), 2);
        // Prepend puts the new twist first in the stored tuple.
        let old = Curve::closed(&st.page, x.segs.clone()).unwrap();
        let old = curves::normalize(&st.page, &old).unwrap();
        assert_eq!(st.factorization.cycles[1], old);
    }

    #[test]
    fn scripts_replay_and_report() {
        let t = annulus();
        let x = core(&t);
        let collar0 = curves::boundary_collar(&t, 0).unwrap();
        let f = Factorization::new(&t, vec![x.clone(), collar0.clone()]).unwrap();
        let g = hurwitz_move(&t, &f, 0, HurwitzDirection::Forward).unwrap();
        let script = MoveScript {
            steps: vec![Step::Hurwitz { index: 0 }],
        };
        let report = run_script(&t, &f, &script, &g).unwrap();
        assert!(report.verified, "{:?}", report);
        assert!(report.final_matches_target);
        assert_eq!(report.steps.len(), 1);
        assert!(report.as_result().is_ok());
        // Same script against a target of the wrong length refutes.
        let short = Factorization::new(&t, vec![x.clone()]).unwrap();
        let report = run_script(&t, &f, &script, &short).unwrap();
        assert!(!report.verified);
        assert!(!report.final_matches_target);

        // replace_isotopic with a genuinely isotopic target succeeds; a
        // non-isotopic target refutes at that step.
        let script = MoveScript {
            steps: vec![Step::ReplaceIsotopic {
                index: 0,
                target: collar0.clone(),
            }],
        };
        let h = Factorization::new(&t, vec![collar0.clone(), collar0.clone()]).unwrap();
        let report = run_script(&t, &f, &script, &h).unwrap();
        assert!(report.verified);

        // On the once-stabilized page the old core and the new handle curve
        // are not isotopic, so a replace_isotopic between them refutes.
        let ob = OpenBook::new(
            t.clone(),
            Factorization::new(&t, vec![x.clone()]).unwrap(),
        )
        .unwrap();
        let arc = curves::edge_parallel_arc(&t, 3).unwrap();
        let st = stabilize(&ob, &arc, StabilizePosition::Append).unwrap();
        let f2 = &st.factorization;
        assert_eq!(f2.cycles.len(), 2);
        let bad = MoveScript {
            steps: vec![Step::ReplaceIsotopic {
                index: 0,
                target: f2.cycles[1].clone(),
            }],
        };
        let report = run_script(&st.page, f2, &bad, f2).unwrap();
        assert!(!report.verified);
        assert!(!report.steps[0].ok);
        match report.as_result() {
            Err(Error::StepFailed { index: 0, .. }) => {}
            other => panic!("expected StepFailed, got {other:?}"),
        }
    }

    #[test]
    fn empty_script_trivially_verifies() {
        let t = annulus();
        let x = core(&t);
        let f = Factorization::new(&t, vec![x]).unwrap();
        let report = run_script(&t, &f, &MoveScript::default(), &f).unwrap();
        assert!(report.verified);
    }

    #[test]
    fn search_finds_a_one_move_script() {
        // The annulus is useless here (all essential curves are isotopic),
        // so work on the genus-one page from a stabilization, where the two
        // cycles are genuinely different.
        let t = annulus();
        let x = core(&t);
        let ob = OpenBook::new(
            t.clone(),
            Factorization::new(&t, vec![x.clone()]).unwrap(),
        )
        .unwrap();
        let arc = curves::edge_parallel_arc(&t, 3).unwrap();
        let st = stabilize(&ob, &arc, StabilizePosition::Append).unwrap();
        let f = &st.factorization;
        let g = hurwitz_move(&st.page, f, 0, HurwitzDirection::Forward).unwrap();
        assert_ne!(g.cycles, f.cycles);
        let found = hurwitz_search(&st.page, f, &g, 3).unwrap();
        let script = found.expect("search should find the move");
        let report = run_script(&st.page, f, &script, &g).unwrap();
        assert!(report.verified);
        // Zero budget cannot reach a different state.
        assert!(hurwitz_search(&st.page, f, &g, 0).unwrap().is_none());
    }

    #[test]
    fn script_json_round_trip() {
        let t = annulus();
        let x = core(&t);
        let w = Word::twist(&t, &x, -1).unwrap();
        let script = MoveScript {
            steps: vec![
                Step::Hurwitz { index: 0 },
                Step::HurwitzInverse { index: 2 },
                Step::Cyclic { shift: 1 },
                Step::Conjugate { word: w.clone() },
                Step::RewriteConjugation {
                    index: 1,
                    word: w,
                    source: x.clone(),
                },
                Step::ReplaceIsotopic {
                    index: 0,
                    target: x.clone(),
                },
            ],
        };
        let j = script.to_json();
        let back = MoveScript::from_json(&t, &j).unwrap();
        assert_eq!(back, script);
    }
}
