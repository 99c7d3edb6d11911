//! Geometric charts: drawing curves on a surface with coordinates.
//!
//! A chart bundles a polygon spec with a planar layout for every polygon
//! (rational coordinates for each corner) and a set of named polyline
//! drawings.  Building the chart triangulates the surface as usual and
//! converts each drawing into combinatorial crossing data, so that a
//! curve can be authored as a handful of waypoints instead of a list of
//! triangle crossings.
//!
//! The conversion is exact: coordinates are `BigRational`s, every
//! incidence test is a sign of a 2x2 determinant, and degenerate
//! drawings (a waypoint on a triangulation diagonal, a segment through a
//! corner, a hop whose two endpoints disagree under the side
//! identification) are rejected rather than perturbed.
//!
//! Layout requirements.  Each polygon must be drawn simple,
//! counterclockwise, and star-shaped around corner 0, because the
//! builder triangulates by the fan with apex at corner 0: fan triangle
//! `f` of an `n`-gon has corners `(0, f+1, f+2)`.  Star-shapedness makes
//! every fan triangle a straight-sided region of the drawing, so a
//! polyline's crossing sequence is exactly its sequence of diagonal
//! crossings.  Gluings must be written so that no polygon needs to be
//! flipped (in practice: `"reversed"` identifications); a chart on a
//! flipped polygon is rejected because its coordinates would no longer
//! match the built triangulation.
//!
//! The builder may normalize the triangulation by edge flips after
//! gluing.  Each flip is replayed on the converted crossing data: the
//! two triangles sharing the flipped edge form a quadrilateral disk, and
//! every maximal run of the curve inside that disk is rerouted across
//! the new diagonal, keeping the endpoints on the quad boundary fixed.
//! Within a disk this rerouting is the unique isotopy class rel
//! endpoints, so the replay preserves the drawn curve up to isotopy.
//!
//! Paths.  A drawing is a sequence of path points:
//!
//! * `{"in": [polygon, [x, y]]}` — an interior waypoint;
//! * `{"hop": [[poly, side, [x, y]], [poly', side', [x', y']]]}` — leave
//!   through a point of an identified side and re-enter at the matching
//!   point of its partner side (both points given explicitly and checked
//!   against the identification);
//! * `{"corner": [polygon, j]}` — an endpoint of an arc at corner `j`.
//!
//! Closed curves are cyclic sequences of waypoints and hops; arcs start
//! and end with corner points.  Consecutive points are joined by
//! straight segments in the polygon layout.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::curves::{Curve, Port, Seg};
use crate::error::{Error, Result};
use crate::surface::{
    build_surface, side_slot, FlipRecord, GluingDirection, PolygonSpec, Triangle, TriId,
    Triangulation,
};

type Q = BigRational;
type Pt = (Q, Q);

fn chart_err<S: Into<String>>(reason: S) -> Error {
    Error::Chart {
        reason: reason.into(),
    }
}

fn parse_rational(v: &Value, what: &str) -> Result<Q> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Q::from_integer(BigInt::from(i))),
            None => Err(chart_err(format!("{what}: number is not an integer"))),
        },
        Value::String(s) => Q::from_str(s.trim())
            .map_err(|e| chart_err(format!("{what}: bad rational {s:?}: {e}"))),
        _ => Err(chart_err(format!(
            "{what}: expected a rational as an integer or a \"p/q\" string"
        ))),
    }
}

fn parse_point(v: &Value, what: &str) -> Result<Pt> {
    let arr = match v.as_array() {
        Some(a) if a.len() == 2 => a,
        _ => return Err(chart_err(format!("{what}: expected [x, y]"))),
    };
    Ok((
        parse_rational(&arr[0], what)?,
        parse_rational(&arr[1], what)?,
    ))
}

/// Sign of the cross product of `b - a` and `c - a`: positive when the
/// triangle `a, b, c` winds counterclockwise.
fn orient(a: &Pt, b: &Pt, c: &Pt) -> Q {
    let ux = &b.0 - &a.0;
    let uy = &b.1 - &a.1;
    let vx = &c.0 - &a.0;
    let vy = &c.1 - &a.1;
    &ux * &vy - &uy * &vx
}

fn sgn(q: &Q) -> i8 {
    match q.cmp(&Q::zero()) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

/// Whether `p`, assumed collinear with `a`-`b`, lies on the closed
/// segment between them.
fn on_segment(a: &Pt, b: &Pt, p: &Pt) -> bool {
    let in_range = |lo: &Q, hi: &Q, x: &Q| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= x && x <= hi
    };
    in_range(&a.0, &b.0, &p.0) && in_range(&a.1, &b.1, &p.1)
}

/// Whether the closed segments `a`-`b` and `c`-`d` share any point.
fn segments_touch(a: &Pt, b: &Pt, c: &Pt, d: &Pt) -> bool {
    let o1 = sgn(&orient(a, b, c));
    let o2 = sgn(&orient(a, b, d));
    let o3 = sgn(&orient(c, d, a));
    let o4 = sgn(&orient(c, d, b));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// Planar coordinates for one polygon: `corners[i]` is the position of
/// corner `i` of the matching `PolygonDecl`.
#[derive(Debug, Clone)]
pub struct ChartPolygon {
    pub id: String,
    pub corners: Vec<(BigRational, BigRational)>,
}

#[derive(Debug, Clone)]
enum PathPoint {
    Inside {
        poly: usize,
        at: Pt,
    },
    Hop {
        exit_poly: usize,
        exit_side: usize,
        exit_at: Pt,
        entry_poly: usize,
        entry_side: usize,
        entry_at: Pt,
    },
    Corner {
        poly: usize,
        corner: usize,
    },
}

#[derive(Debug, Clone)]
struct ChartCurve {
    name: String,
    closed: bool,
    points: Vec<PathPoint>,
}

/// A surface spec with polygon layouts and drawn curves.
#[derive(Debug, Clone)]
pub struct ChartBundle {
    spec: PolygonSpec,
    layouts: Vec<ChartPolygon>,
    curves: Vec<ChartCurve>,
}

/// A built chart: the triangulated page and each drawing converted to
/// crossing data on it.
#[derive(Debug)]
pub struct Chart {
    pub triangulation: Triangulation,
    pub curves: BTreeMap<String, Curve>,
}

impl Chart {
    /// The named curve, or an error naming it.
    pub fn curve(&self, name: &str) -> Result<&Curve> {
        self.curves
            .get(name)
            .ok_or_else(|| chart_err(format!("chart has no curve named {name:?}")))
    }
}

impl ChartBundle {
    pub fn from_json(text: &str) -> Result<ChartBundle> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| chart_err(format!("chart json: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<ChartBundle> {
        let obj = v
            .as_object()
            .ok_or_else(|| chart_err("chart must be a json object"))?;
        let spec: PolygonSpec = serde_json::from_value(
            obj.get("surface")
                .ok_or_else(|| chart_err("chart is missing \"surface\""))?
                .clone(),
        )
        .map_err(|e| chart_err(format!("surface spec: {e}")))?;

        let lay_v = obj
            .get("layouts")
            .and_then(Value::as_array)
            .ok_or_else(|| chart_err("chart is missing \"layouts\" (array)"))?;
        if lay_v.len() != spec.polygons.len() {
            return Err(chart_err(format!(
                "chart has {} layouts for {} polygons",
                lay_v.len(),
                spec.polygons.len()
            )));
        }
        let mut layouts = Vec::new();
        for (i, lv) in lay_v.iter().enumerate() {
            let decl = &spec.polygons[i];
            let what = format!("layout {}", decl.id);
            let lo = lv
                .as_object()
                .ok_or_else(|| chart_err(format!("{what}: expected an object")))?;
            let id = lo
                .get("id")
                .and_then(Value::as_str)
                .ok_or_else(|| chart_err(format!("{what}: missing \"id\"")))?;
            if id != decl.id {
                return Err(chart_err(format!(
                    "layout {i} is for {id:?} but polygon {i} is {:?} (layouts must \
                     follow polygon order)",
                    decl.id
                )));
            }
            let cs = lo
                .get("corners")
                .and_then(Value::as_array)
                .ok_or_else(|| chart_err(format!("{what}: missing \"corners\" (array)")))?;
            if cs.len() != decl.sides.len() {
                return Err(chart_err(format!(
                    "{what}: {} corner positions for {} sides",
                    cs.len(),
                    decl.sides.len()
                )));
            }
            let corners = cs
                .iter()
                .map(|c| parse_point(c, &what))
                .collect::<Result<Vec<_>>>()?;
            layouts.push(ChartPolygon {
                id: id.to_string(),
                corners,
            });
        }

        let mut poly_ix = BTreeMap::new();
        for (i, p) in spec.polygons.iter().enumerate() {
            poly_ix.insert(p.id.clone(), i);
        }
        let n_sides: Vec<usize> = spec.polygons.iter().map(|p| p.sides.len()).collect();

        let mut curves = Vec::new();
        if let Some(cv) = obj.get("curves") {
            let arr = cv
                .as_array()
                .ok_or_else(|| chart_err("\"curves\" must be an array"))?;
            for c in arr {
                curves.push(parse_curve(c, &poly_ix, &n_sides)?);
            }
        }
        Ok(ChartBundle {
            spec,
            layouts,
            curves,
        })
    }

    /// Triangulate the surface and convert every drawing.
    pub fn build(&self) -> Result<Chart> {
        for lay in &self.layouts {
            validate_layout(lay)?;
        }
        let t = build_surface(&self.spec)?;
        if let Some(p) = t.provenance.flipped_polygons.iter().position(|&f| f) {
            return Err(chart_err(format!(
                "identification directions force polygon {:?} to be flipped; \
                 rewrite the gluings as \"reversed\" and adjust the layout",
                self.spec.polygons[p].id
            )));
        }
        let conv = Conv {
            t: &t,
            spec: &self.spec,
            lays: &self.layouts,
        };
        let mut curves = BTreeMap::new();
        for c in &self.curves {
            if curves.contains_key(&c.name) {
                return Err(chart_err(format!("duplicate curve name {:?}", c.name)));
            }
            let raw = conv.convert(c)?;
            let segs = replay_flips(&t, raw, c.closed)?;
            let curve = if c.closed {
                if segs.is_empty() {
                    return Err(chart_err(format!(
                        "curve {:?}: closed path is contractible on the surface",
                        c.name
                    )));
                }
                Curve::closed(&t, segs)?
            } else {
                Curve::arc(&t, segs)?
            };
            curves.insert(c.name.clone(), curve);
        }
        Ok(Chart {
            triangulation: t,
            curves,
        })
    }
}

fn parse_curve(
    v: &Value,
    poly_ix: &BTreeMap<String, usize>,
    n_sides: &[usize],
) -> Result<ChartCurve> {
    let obj = v
        .as_object()
        .ok_or_else(|| chart_err("curve entries must be objects"))?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| chart_err("curve is missing \"name\""))?
        .to_string();
    let what = format!("curve {name}");
    let closed = obj
        .get("closed")
        .and_then(Value::as_bool)
        .ok_or_else(|| chart_err(format!("{what}: missing \"closed\" (bool)")))?;
    let path = obj
        .get("path")
        .and_then(Value::as_array)
        .ok_or_else(|| chart_err(format!("{what}: missing \"path\" (array)")))?;
    let mut points = Vec::new();
    for pv in path {
        points.push(parse_path_point(pv, poly_ix, n_sides, &what)?);
    }
    if points.is_empty() {
        return Err(chart_err(format!("{what}: empty path")));
    }
    Ok(ChartCurve {
        name,
        closed,
        points,
    })
}

fn parse_path_point(
    v: &Value,
    poly_ix: &BTreeMap<String, usize>,
    n_sides: &[usize],
    what: &str,
) -> Result<PathPoint> {
    let obj = match v.as_object() {
        Some(o) if o.len() == 1 => o,
        _ => {
            return Err(chart_err(format!(
                "{what}: each path point is an object with exactly one of \
                 \"in\", \"hop\", \"corner\""
            )))
        }
    };
    let poly = |pv: &Value| -> Result<usize> {
        let id = pv
            .as_str()
            .ok_or_else(|| chart_err(format!("{what}: polygon must be an id string")))?;
        poly_ix
            .get(id)
            .copied()
            .ok_or_else(|| chart_err(format!("{what}: unknown polygon {id:?}")))
    };
    if let Some(x) = obj.get("in") {
        let arr = match x.as_array() {
            Some(a) if a.len() == 2 => a,
            _ => return Err(chart_err(format!("{what}: \"in\" takes [polygon, [x, y]]"))),
        };
        let p = poly(&arr[0])?;
        return Ok(PathPoint::Inside {
            poly: p,
            at: parse_point(&arr[1], what)?,
        });
    }
    if let Some(x) = obj.get("corner") {
        let arr = match x.as_array() {
            Some(a) if a.len() == 2 => a,
            _ => {
                return Err(chart_err(format!(
                    "{what}: \"corner\" takes [polygon, corner index]"
                )))
            }
        };
        let p = poly(&arr[0])?;
        let j = arr[1]
            .as_u64()
            .ok_or_else(|| chart_err(format!("{what}: corner index must be an integer")))?
            as usize;
        if j >= n_sides[p] {
            return Err(chart_err(format!(
                "{what}: corner {j} out of range for polygon with {} sides",
                n_sides[p]
            )));
        }
        return Ok(PathPoint::Corner { poly: p, corner: j });
    }
    if let Some(x) = obj.get("hop") {
        let arr = match x.as_array() {
            Some(a) if a.len() == 2 => a,
            _ => {
                return Err(chart_err(format!(
                    "{what}: \"hop\" takes [[poly, side, [x, y]], [poly, side, [x, y]]]"
                )))
            }
        };
        let mut parts = Vec::new();
        for half in arr {
            let h = match half.as_array() {
                Some(a) if a.len() == 3 => a,
                _ => {
                    return Err(chart_err(format!(
                        "{what}: each hop half is [poly, side, [x, y]]"
                    )))
                }
            };
            let p = poly(&h[0])?;
            let s = h[1]
                .as_u64()
                .ok_or_else(|| chart_err(format!("{what}: side index must be an integer")))?
                as usize;
            if s >= n_sides[p] {
                return Err(chart_err(format!(
                    "{what}: side {s} out of range for polygon with {} sides",
                    n_sides[p]
                )));
            }
            parts.push((p, s, parse_point(&h[2], what)?));
        }
        let (entry_poly, entry_side, entry_at) = parts.pop().unwrap();
        let (exit_poly, exit_side, exit_at) = parts.pop().unwrap();
        return Ok(PathPoint::Hop {
            exit_poly,
            exit_side,
            exit_at,
            entry_poly,
            entry_side,
            entry_at,
        });
    }
    Err(chart_err(format!(
        "{what}: unknown path point (use \"in\", \"hop\", or \"corner\")"
    )))
}

/// Check that a layout is usable: simple, counterclockwise, and
/// star-shaped around corner 0 (every fan triangle strictly positive).
/// Together with simplicity, positive fan triangles force the fan to
/// tile the polygon: the winding number of the boundary about any
/// interior point is 1 and equals the sum of the fan triangles'
/// windings, each 0 or 1, so exactly one fan triangle covers each point.
fn validate_layout(lay: &ChartPolygon) -> Result<()> {
    let n = lay.corners.len();
    let what = format!("layout {}", lay.id);
    for i in 0..n {
        for j in i + 1..n {
            if lay.corners[i] == lay.corners[j] {
                return Err(chart_err(format!(
                    "{what}: corners {i} and {j} coincide"
                )));
            }
        }
    }
    let c = |i: usize| &lay.corners[i % n];
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Shared corner: the two sides may only meet there.
                let (shared, a, b) = if j == i + 1 {
                    (c(i + 1), c(i), c(i + 2))
                } else {
                    (c(0), c(1), c(n - 1))
                };
                let turn = orient(shared, a, b);
                if turn.is_zero() {
                    let da = (&a.0 - &shared.0, &a.1 - &shared.1);
                    let db = (&b.0 - &shared.0, &b.1 - &shared.1);
                    let dot = &da.0 * &db.0 + &da.1 * &db.1;
                    if sgn(&dot) > 0 {
                        return Err(chart_err(format!(
                            "{what}: sides {i} and {j} fold back on each other"
                        )));
                    }
                }
            } else if segments_touch(c(i), c(i + 1), c(j), c(j + 1)) {
                return Err(chart_err(format!(
                    "{what}: sides {i} and {j} intersect; the polygon must be simple"
                )));
            }
        }
    }
    for f in 0..n - 2 {
        if sgn(&orient(c(0), c(f + 1), c(f + 2))) <= 0 {
            return Err(chart_err(format!(
                "{what}: fan triangle (0, {}, {}) is not counterclockwise; the \
                 polygon must be drawn counterclockwise and star-shaped around \
                 corner 0",
                f + 1,
                f + 2
            )));
        }
    }
    Ok(())
}

/// Where a run of a drawing meets the boundary of its polygon.
enum Gate {
    SidePt { side: usize, at: Pt },
    CornerPt { corner: usize },
}

struct Conv<'a> {
    t: &'a Triangulation,
    spec: &'a PolygonSpec,
    lays: &'a [ChartPolygon],
}

impl Conv<'_> {
    fn n(&self, p: usize) -> usize {
        self.lays[p].corners.len()
    }

    fn corner(&self, p: usize, j: usize) -> &Pt {
        &self.lays[p].corners[j % self.n(p)]
    }

    fn fan_tri(&self, p: usize, f: usize) -> TriId {
        self.t.provenance.fan_triangle[&(p, f)]
    }

    /// The fan triangle whose open interior contains `pt`; errors when
    /// the point sits on a diagonal, on the boundary, or outside.
    fn sector_of(&self, p: usize, pt: &Pt, what: &str) -> Result<usize> {
        let n = self.n(p);
        let c0 = self.corner(p, 0);
        for f in 0..n - 2 {
            let a = self.corner(p, f + 1);
            let b = self.corner(p, f + 2);
            if sgn(&orient(c0, a, pt)) > 0
                && sgn(&orient(a, b, pt)) > 0
                && sgn(&orient(b, c0, pt)) > 0
            {
                return Ok(f);
            }
        }
        Err(chart_err(format!(
            "{what}: waypoint is not strictly inside a fan triangle (it lies \
             on a diagonal or side, or outside the polygon)"
        )))
    }

    /// Proper crossings of the open segment `u`-`v` with the fan
    /// diagonals of polygon `p`, sorted along the segment: `(t, i,
    /// to_left)` where `t` is the position on `u`-`v`, `i` the diagonal
    /// (corner 0 to corner `i`), and `to_left` whether the segment
    /// passes to the left side of the directed diagonal.
    fn crossings(&self, p: usize, u: &Pt, v: &Pt, what: &str) -> Result<Vec<(Q, usize, bool)>> {
        let n = self.n(p);
        let c0 = self.corner(p, 0);
        let mut out: Vec<(Q, usize, bool)> = Vec::new();
        for i in 2..=n.saturating_sub(2) {
            let ci = self.corner(p, i);
            let o3 = orient(c0, ci, u);
            let o4 = orient(c0, ci, v);
            let (s3, s4) = (sgn(&o3), sgn(&o4));
            if s3 == 0 && s4 == 0 {
                return Err(chart_err(format!(
                    "{what}: a segment is collinear with diagonal (0, {i})"
                )));
            }
            if s3 * s4 < 0 {
                let o1 = orient(u, v, c0);
                let o2 = orient(u, v, ci);
                if sgn(&o1) * sgn(&o2) >= 0 {
                    return Err(chart_err(format!(
                        "{what}: a segment passes through corner 0 or corner {i}"
                    )));
                }
                let t = &o3 / (&o3 - &o4);
                out.push((t, i, s4 > 0));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        for w in out.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(chart_err(format!(
                    "{what}: a segment crosses two diagonals at the same point"
                )));
            }
        }
        Ok(out)
    }

    fn gate_point(&self, p: usize, g: &Gate) -> Pt {
        match g {
            Gate::SidePt { at, .. } => at.clone(),
            Gate::CornerPt { corner } => self.corner(p, *corner).clone(),
        }
    }

    /// Position of `at` along side `s` (corner `s` at 0, corner `s+1`
    /// at 1), strictly between the corners.
    fn side_param(&self, p: usize, s: usize, at: &Pt, what: &str) -> Result<Q> {
        let a = self.corner(p, s);
        let b = self.corner(p, s + 1);
        if !orient(a, b, at).is_zero() {
            return Err(chart_err(format!(
                "{what}: hop point is not on side {s} of polygon {:?}",
                self.lays[p].id
            )));
        }
        let dx = &b.0 - &a.0;
        let t = if !dx.is_zero() {
            (&at.0 - &a.0) / dx
        } else {
            (&at.1 - &a.1) / (&b.1 - &a.1)
        };
        if sgn(&t) <= 0 || t >= Q::one() {
            return Err(chart_err(format!(
                "{what}: hop point must lie strictly inside side {s} of polygon {:?}",
                self.lays[p].id
            )));
        }
        Ok(t)
    }

    /// Check a hop against the side identifications: the two sides must
    /// be glued to each other and the two points must correspond under
    /// the gluing's parameter map (`t' = t` for same, `t' = 1 - t` for
    /// reversed).
    fn hop_check(&self, h: &PathPoint, what: &str) -> Result<()> {
        let PathPoint::Hop {
            exit_poly,
            exit_side,
            exit_at,
            entry_poly,
            entry_side,
            entry_at,
        } = h
        else {
            unreachable!("hop_check on a non-hop");
        };
        let te = self.side_param(*exit_poly, *exit_side, exit_at, what)?;
        let tn = self.side_param(*entry_poly, *entry_side, entry_at, what)?;
        let exit_ref = (self.spec.polygons[*exit_poly].id.as_str(), *exit_side);
        let entry_ref = (self.spec.polygons[*entry_poly].id.as_str(), *entry_side);
        for ident in &self.spec.identifications {
            let a = (ident.0.polygon.as_str(), ident.0.index);
            let b = (ident.1.polygon.as_str(), ident.1.index);
            if (a == exit_ref && b == entry_ref) || (a == entry_ref && b == exit_ref) {
                let ok = match ident.2 {
                    GluingDirection::Same => te == tn,
                    GluingDirection::Reversed => &te + &tn == Q::one(),
                };
                if !ok {
                    return Err(chart_err(format!(
                        "{what}: hop endpoints do not correspond under the side \
                         identification"
                    )));
                }
                return Ok(());
            }
        }
        Err(chart_err(format!(
            "{what}: hop between sides that are not identified with each other"
        )))
    }

    /// Local side index of diagonal `i` in fan triangle `f`.
    fn diag_slot(&self, f: usize, i: usize) -> u8 {
        if i == f + 1 {
            0
        } else {
            debug_assert_eq!(i, f + 2, "diagonal {i} does not bound sector {f}");
            2
        }
    }

    /// The port of a gate as seen from fan triangle `sec`.
    fn gate_port(&self, p: usize, g: &Gate, sec: usize, what: &str) -> Result<Port> {
        match g {
            Gate::SidePt { side, .. } => {
                let (f, k) = side_slot(self.n(p), *side);
                debug_assert_eq!(f, sec);
                Ok(Port::Side(k as u8))
            }
            Gate::CornerPt { corner } => {
                let j = *corner;
                if j == 0 {
                    Ok(Port::Corner(0))
                } else if j == sec + 1 {
                    Ok(Port::Corner(1))
                } else if j == sec + 2 {
                    Ok(Port::Corner(2))
                } else {
                    Err(chart_err(format!(
                        "{what}: path reaches corner {j} from fan triangle {sec}, \
                         which does not contain it"
                    )))
                }
            }
        }
    }

    /// The fan triangle a run occupies as it leaves its start gate,
    /// `toward` being the next drawn point.
    fn start_sector(
        &self,
        p: usize,
        start: &Gate,
        inner: &[Pt],
        end: &Gate,
        what: &str,
    ) -> Result<usize> {
        let n = self.n(p);
        match start {
            Gate::SidePt { side, .. } => Ok(side_slot(n, *side).0),
            Gate::CornerPt { corner } => {
                let j = *corner;
                if j == 1 {
                    return Ok(0);
                }
                if j == n - 1 {
                    return Ok(n - 3);
                }
                if j == 0 {
                    if let Some(q) = inner.first() {
                        return self.sector_of(p, q, what);
                    }
                    return match end {
                        Gate::SidePt { side, .. } => Ok(side_slot(n, *side).0),
                        Gate::CornerPt { .. } => Err(chart_err(format!(
                            "{what}: a straight chord from corner 0 to another corner \
                             runs along the fan; add a waypoint"
                        ))),
                    };
                }
                let toward = match inner.first() {
                    Some(q) => q.clone(),
                    None => self.gate_point(p, end),
                };
                let o = sgn(&orient(self.corner(p, 0), self.corner(p, j), &toward));
                match o {
                    1 => Ok(j - 1),
                    -1 => Ok(j - 2),
                    _ => Err(chart_err(format!(
                        "{what}: path leaves corner {j} along its own diagonal"
                    ))),
                }
            }
        }
    }

    /// Sectors a gate is allowed to be reached from.
    fn end_claim_ok(&self, p: usize, g: &Gate, sec: usize) -> bool {
        let n = self.n(p);
        match g {
            Gate::SidePt { side, .. } => side_slot(n, *side).0 == sec,
            Gate::CornerPt { corner } => match *corner {
                0 => true,
                j if j == 1 => sec == 0,
                j if j == n - 1 => sec == n - 3,
                j => sec + 1 == j || sec + 2 == j,
            },
        }
    }

    /// Convert one run (a maximal piece of the drawing inside a single
    /// polygon) into triangle crossings.
    fn convert_run(
        &self,
        p: usize,
        start: &Gate,
        inner: &[Pt],
        end: &Gate,
        what: &str,
    ) -> Result<Vec<Seg>> {
        let mut pts: Vec<Pt> = Vec::with_capacity(inner.len() + 2);
        pts.push(self.gate_point(p, start));
        pts.extend(inner.iter().cloned());
        pts.push(self.gate_point(p, end));

        let s0 = self.start_sector(p, start, inner, end, what)?;
        let mut cur = s0;
        // (diagonal index, sector after crossing it)
        let mut events: Vec<(usize, usize)> = Vec::new();
        for w in 0..pts.len() - 1 {
            for (_t, i, left) in self.crossings(p, &pts[w], &pts[w + 1], what)? {
                let (from_f, to_f) = if left { (i - 2, i - 1) } else { (i - 1, i - 2) };
                if cur != from_f {
                    return Err(chart_err(format!(
                        "{what}: inconsistent drawing: the path crosses diagonal \
                         (0, {i}) from fan triangle {cur}"
                    )));
                }
                cur = to_f;
                events.push((i, cur));
            }
            if w + 1 < pts.len() - 1 {
                let claimed = self.sector_of(p, &pts[w + 1], what)?;
                if claimed != cur {
                    return Err(chart_err(format!(
                        "{what}: waypoint lies in fan triangle {claimed} but the \
                         path walks into fan triangle {cur}"
                    )));
                }
            }
        }
        if !self.end_claim_ok(p, end, cur) {
            return Err(chart_err(format!(
                "{what}: the path's crossing sequence does not reach its endpoint's \
                 fan triangle (ended in {cur})"
            )));
        }

        let mut segs = Vec::with_capacity(events.len() + 1);
        let mut sec = s0;
        let mut enter = self.gate_port(p, start, sec, what)?;
        for (i, after) in &events {
            segs.push(Seg {
                tri: self.fan_tri(p, sec),
                enter,
                exit: Port::Side(self.diag_slot(sec, *i)),
            });
            enter = Port::Side(self.diag_slot(*after, *i));
            sec = *after;
        }
        segs.push(Seg {
            tri: self.fan_tri(p, sec),
            enter,
            exit: self.gate_port(p, end, sec, what)?,
        });
        Ok(segs)
    }

    /// Convert a closed drawing that never leaves one polygon: a cyclic
    /// walk through the fan.
    fn convert_loop(&self, p: usize, pts: &[Pt], what: &str) -> Result<Vec<Seg>> {
        let m = pts.len();
        let mut cur = self.sector_of(p, &pts[0], what)?;
        let mut events: Vec<(usize, usize)> = Vec::new();
        for w in 0..m {
            let a = &pts[w];
            let b = &pts[(w + 1) % m];
            for (_t, i, left) in self.crossings(p, a, b, what)? {
                let (from_f, to_f) = if left { (i - 2, i - 1) } else { (i - 1, i - 2) };
                if cur != from_f {
                    return Err(chart_err(format!(
                        "{what}: inconsistent drawing: the path crosses diagonal \
                         (0, {i}) from fan triangle {cur}"
                    )));
                }
                cur = to_f;
                events.push((i, cur));
            }
            let claimed = self.sector_of(p, b, what)?;
            if claimed != cur {
                return Err(chart_err(format!(
                    "{what}: waypoint lies in fan triangle {claimed} but the path \
                     walks into fan triangle {cur}"
                )));
            }
        }
        let k = events.len();
        let mut segs = Vec::with_capacity(k);
        for x in 0..k {
            let (i_in, sec) = events[x];
            let (i_out, _) = events[(x + 1) % k];
            segs.push(Seg {
                tri: self.fan_tri(p, sec),
                enter: Port::Side(self.diag_slot(sec, i_in)),
                exit: Port::Side(self.diag_slot(sec, i_out)),
            });
        }
        Ok(segs)
    }

    fn convert(&self, c: &ChartCurve) -> Result<Vec<Seg>> {
        let what = format!("curve {}", c.name);
        if c.closed {
            self.convert_closed(c, &what)
        } else {
            self.convert_arc(c, &what)
        }
    }

    fn convert_closed(&self, c: &ChartCurve, what: &str) -> Result<Vec<Seg>> {
        for pt in &c.points {
            if matches!(pt, PathPoint::Corner { .. }) {
                return Err(chart_err(format!(
                    "{what}: corner points are only allowed on arcs"
                )));
            }
        }
        let first_hop = c.points.iter().position(|p| matches!(p, PathPoint::Hop { .. }));
        let Some(h0) = first_hop else {
            // No hops: the whole drawing stays inside one polygon.
            let mut poly = None;
            let mut pts = Vec::new();
            for pt in &c.points {
                let PathPoint::Inside { poly: p, at } = pt else {
                    unreachable!();
                };
                match poly {
                    None => poly = Some(*p),
                    Some(q) if q == *p => {}
                    Some(_) => {
                        return Err(chart_err(format!(
                            "{what}: a closed path without hops must stay in one polygon"
                        )))
                    }
                }
                pts.push(at.clone());
            }
            return self.convert_loop(poly.unwrap(), &pts, what);
        };

        // Rotate so the path starts at a hop, then convert hop-to-hop runs.
        let rot: Vec<&PathPoint> = c
            .points
            .iter()
            .cycle()
            .skip(h0)
            .take(c.points.len())
            .collect();
        let mut segs = Vec::new();
        let mut idx = 0;
        while idx < rot.len() {
            let hop = rot[idx];
            self.hop_check(hop, what)?;
            let PathPoint::Hop {
                entry_poly,
                entry_side,
                entry_at,
                ..
            } = hop
            else {
                return Err(chart_err(format!(
                    "{what}: expected a hop between polygon runs"
                )));
            };
            let p = *entry_poly;
            let start = Gate::SidePt {
                side: *entry_side,
                at: entry_at.clone(),
            };
            let mut inner = Vec::new();
            let mut j = idx + 1;
            while j < rot.len() {
                match rot[j] {
                    PathPoint::Inside { poly, at } => {
                        if *poly != p {
                            return Err(chart_err(format!(
                                "{what}: waypoint in polygon {:?} inside a run through \
                                 polygon {:?}",
                                self.lays[*poly].id, self.lays[p].id
                            )));
                        }
                        inner.push(at.clone());
                        j += 1;
                    }
                    _ => break,
                }
            }
            // The run ends at the next hop's exit (cyclically).
            let next_hop = if j < rot.len() { rot[j] } else { rot[0] };
            let PathPoint::Hop {
                exit_poly,
                exit_side,
                exit_at,
                ..
            } = next_hop
            else {
                return Err(chart_err(format!(
                    "{what}: expected a hop between polygon runs"
                )));
            };
            if *exit_poly != p {
                return Err(chart_err(format!(
                    "{what}: run through polygon {:?} ends with a hop leaving \
                     polygon {:?}",
                    self.lays[p].id, self.lays[*exit_poly].id
                )));
            }
            let end = Gate::SidePt {
                side: *exit_side,
                at: exit_at.clone(),
            };
            segs.extend(self.convert_run(p, &start, &inner, &end, what)?);
            idx = j;
        }
        Ok(segs)
    }

    fn convert_arc(&self, c: &ChartCurve, what: &str) -> Result<Vec<Seg>> {
        let pts = &c.points;
        if pts.len() < 2 {
            return Err(chart_err(format!(
                "{what}: an arc needs at least its two corner endpoints"
            )));
        }
        let PathPoint::Corner {
            poly: p_start,
            corner: j_start,
        } = &pts[0]
        else {
            return Err(chart_err(format!("{what}: arcs must start at a corner")));
        };
        let PathPoint::Corner {
            poly: _,
            corner: _,
        } = &pts[pts.len() - 1]
        else {
            return Err(chart_err(format!("{what}: arcs must end at a corner")));
        };

        let mut segs = Vec::new();
        let mut p = *p_start;
        let mut start = Gate::CornerPt { corner: *j_start };
        let mut inner: Vec<Pt> = Vec::new();
        for (k, pt) in pts.iter().enumerate().skip(1) {
            match pt {
                PathPoint::Corner { poly, corner } => {
                    if k != pts.len() - 1 {
                        return Err(chart_err(format!(
                            "{what}: corner points may only start or end an arc"
                        )));
                    }
                    if *poly != p {
                        return Err(chart_err(format!(
                            "{what}: arc ends at a corner of polygon {:?} but its last \
                             run is in polygon {:?}",
                            self.lays[*poly].id, self.lays[p].id
                        )));
                    }
                    let end = Gate::CornerPt { corner: *corner };
                    segs.extend(self.convert_run(p, &start, &inner, &end, what)?);
                }
                PathPoint::Inside { poly, at } => {
                    if *poly != p {
                        return Err(chart_err(format!(
                            "{what}: waypoint in polygon {:?} inside a run through \
                             polygon {:?}",
                            self.lays[*poly].id, self.lays[p].id
                        )));
                    }
                    inner.push(at.clone());
                }
                PathPoint::Hop {
                    exit_poly,
                    exit_side,
                    exit_at,
                    entry_poly,
                    entry_side,
                    entry_at,
                } => {
                    self.hop_check(pt, what)?;
                    if *exit_poly != p {
                        return Err(chart_err(format!(
                            "{what}: run through polygon {:?} ends with a hop leaving \
                             polygon {:?}",
                            self.lays[p].id, self.lays[*exit_poly].id
                        )));
                    }
                    let end = Gate::SidePt {
                        side: *exit_side,
                        at: exit_at.clone(),
                    };
                    segs.extend(self.convert_run(p, &start, &inner, &end, what)?);
                    p = *entry_poly;
                    start = Gate::SidePt {
                        side: *entry_side,
                        at: entry_at.clone(),
                    };
                    inner = Vec::new();
                }
            }
        }
        Ok(segs)
    }
}

// ---------------------------------------------------------------------------
// Flip replay.

/// Corner labels of the quadrilateral around a flipped edge: `A` and `B`
/// are the tail and head of the old diagonal, `X` and `Y` the third
/// corners of its two triangles (ends of the new diagonal).
const LAB_A: u8 = 0;
const LAB_B: u8 = 1;
const LAB_X: u8 = 2;
const LAB_Y: u8 = 3;

type OuterKey = (usize, bool);

/// Rewrite crossing data through every edge flip the builder performed,
/// in order.  Each flip only touches the two triangles around the
/// flipped edge; the quad they form is a disk, so each maximal run of
/// the curve through the quad is rerouted across the new diagonal with
/// the same boundary endpoints, which is the unique isotopy class rel
/// endpoints.
fn replay_flips(t: &Triangulation, mut segs: Vec<Seg>, closed: bool) -> Result<Vec<Seg>> {
    for rec in &t.provenance.flips {
        segs = replay_one(rec, segs, closed)?;
    }
    Ok(segs)
}

fn replay_one(rec: &FlipRecord, segs: Vec<Seg>, closed: bool) -> Result<Vec<Seg>> {
    let in_quad = |s: &Seg| s.tri == rec.t1 || s.tri == rec.t2;
    if !segs.iter().any(in_quad) {
        return Ok(segs);
    }

    // Quad corner labels on the two old triangles.
    let label_old = |tri: &Triangle, third: u8| -> [u8; 3] {
        let d = tri.side_with_edge(rec.edge) as usize;
        let mut lab = [0u8; 3];
        if tri.sides[d].forward {
            lab[d] = LAB_A;
            lab[(d + 1) % 3] = LAB_B;
        } else {
            lab[d] = LAB_B;
            lab[(d + 1) % 3] = LAB_A;
        }
        lab[(d + 2) % 3] = third;
        lab
    };
    let lab1 = label_old(&rec.old_t1, LAB_X);
    let lab2 = label_old(&rec.old_t2, LAB_Y);

    // Each outer side of the quad, keyed by (edge, forward-in-triangle):
    // the forward flag distinguishes the two incidences when one edge
    // appears twice on the quad boundary.  Values are the labels of the
    // side's tail and head corners.
    let mut outer_ends: BTreeMap<OuterKey, (u8, u8)> = BTreeMap::new();
    for (tri, lab) in [(&rec.old_t1, &lab1), (&rec.old_t2, &lab2)] {
        let d = tri.side_with_edge(rec.edge) as usize;
        for k in 0..3 {
            if k == d {
                continue;
            }
            let ts = tri.sides[k];
            outer_ends.insert((ts.edge, ts.forward), (lab[k], lab[(k + 1) % 3]));
        }
    }
    debug_assert_eq!(outer_ends.len(), 4, "quad outer sides are not distinct");

    // Label the corners of the new triangles.  A corner met by two outer
    // sides is their common quad corner; a corner met by one outer side
    // and the new diagonal is that side's end on the diagonal (X or Y).
    let label_new = |tri: &Triangle| -> Result<[u8; 3]> {
        let d = tri.side_with_edge(rec.edge) as usize;
        let mut lab = [u8::MAX; 3];
        for c in 0..3 {
            let mut keys = Vec::new();
            for s in [c, (c + 2) % 3] {
                if s != d {
                    let ts = tri.sides[s];
                    keys.push((ts.edge, ts.forward));
                }
            }
            lab[c] = match keys.len() {
                2 => {
                    let p = outer_ends[&keys[0]];
                    let q = outer_ends[&keys[1]];
                    let shared = [p.0, p.1]
                        .into_iter()
                        .find(|x| *x == q.0 || *x == q.1);
                    shared.ok_or_else(|| {
                        chart_err("edge flip bookkeeping failed: outer sides share no corner")
                    })?
                }
                1 => {
                    let (u, v) = outer_ends[&keys[0]];
                    if u == LAB_X || u == LAB_Y {
                        u
                    } else {
                        debug_assert!(v == LAB_X || v == LAB_Y);
                        v
                    }
                }
                _ => {
                    return Err(chart_err(
                        "edge flip bookkeeping failed: corner met by no outer side",
                    ))
                }
            };
        }
        Ok(lab)
    };
    let nlab1 = label_new(&rec.new_t1)?;
    let nlab2 = label_new(&rec.new_t2)?;

    // Where an outer side or a labeled corner lives after the flip.
    let nd1 = rec.new_t1.side_with_edge(rec.edge);
    let nd2 = rec.new_t2.side_with_edge(rec.edge);
    let locate_outer = |key: OuterKey| -> Result<(TriId, u8, u8)> {
        for (tid, tri, nd) in [(rec.t1, &rec.new_t1, nd1), (rec.t2, &rec.new_t2, nd2)] {
            for k in 0..3u8 {
                if k == nd {
                    continue;
                }
                let ts = tri.sides[k as usize];
                if (ts.edge, ts.forward) == key {
                    return Ok((tid, k, nd));
                }
            }
        }
        Err(chart_err(
            "edge flip bookkeeping failed: an outer side vanished",
        ))
    };
    let corner_in = |tid: TriId, l: u8| -> Option<u8> {
        let lab = if tid == rec.t1 { &nlab1 } else { &nlab2 };
        lab.iter().position(|x| *x == l).map(|k| k as u8)
    };

    // One endpoint of a run through the quad.
    #[derive(Clone, Copy, PartialEq, Eq, Debug)]
    enum Item {
        Internal,
        Outer(OuterKey),
        Corner(u8),
    }
    let classify = |seg: &Seg, port: Port| -> Item {
        let (old, lab) = if seg.tri == rec.t1 {
            (&rec.old_t1, &lab1)
        } else {
            (&rec.old_t2, &lab2)
        };
        let d = old.side_with_edge(rec.edge);
        match port {
            Port::Side(k) if k == d => Item::Internal,
            Port::Side(k) => {
                let ts = old.sides[k as usize];
                Item::Outer((ts.edge, ts.forward))
            }
            Port::Corner(c) => Item::Corner(lab[c as usize]),
        }
    };

    // Reroute one run: a straight path in the new quad between the same
    // boundary items, crossing the new diagonal when they end up in
    // different new triangles.
    let rewrite = |start: Item, end: Item| -> Result<Vec<Seg>> {
        let two = |ta: TriId, pa: Port, tb: TriId, pb: Port| -> Vec<Seg> {
            let (da, db) = (
                if ta == rec.t1 { nd1 } else { nd2 },
                if tb == rec.t1 { nd1 } else { nd2 },
            );
            vec![
                Seg {
                    tri: ta,
                    enter: pa,
                    exit: Port::Side(da),
                },
                Seg {
                    tri: tb,
                    enter: Port::Side(db),
                    exit: pb,
                },
            ]
        };
        match (start, end) {
            (Item::Outer(ku), Item::Outer(kv)) => {
                let (tu, su, _) = locate_outer(ku)?;
                let (tv, sv, _) = locate_outer(kv)?;
                if tu == tv {
                    Ok(vec![Seg {
                        tri: tu,
                        enter: Port::Side(su),
                        exit: Port::Side(sv),
                    }])
                } else {
                    Ok(two(tu, Port::Side(su), tv, Port::Side(sv)))
                }
            }
            (Item::Corner(l), Item::Outer(kv)) => {
                let (tv, sv, _) = locate_outer(kv)?;
                if let Some(c) = corner_in(tv, l) {
                    Ok(vec![Seg {
                        tri: tv,
                        enter: Port::Corner(c),
                        exit: Port::Side(sv),
                    }])
                } else {
                    let tl = if tv == rec.t1 { rec.t2 } else { rec.t1 };
                    let c = corner_in(tl, l).ok_or_else(|| {
                        chart_err("edge flip bookkeeping failed: lost a quad corner")
                    })?;
                    Ok(two(tl, Port::Corner(c), tv, Port::Side(sv)))
                }
            }
            (Item::Outer(ku), Item::Corner(l)) => {
                let (tu, su, _) = locate_outer(ku)?;
                if let Some(c) = corner_in(tu, l) {
                    Ok(vec![Seg {
                        tri: tu,
                        enter: Port::Side(su),
                        exit: Port::Corner(c),
                    }])
                } else {
                    let tl = if tu == rec.t1 { rec.t2 } else { rec.t1 };
                    let c = corner_in(tl, l).ok_or_else(|| {
                        chart_err("edge flip bookkeeping failed: lost a quad corner")
                    })?;
                    Ok(two(tu, Port::Side(su), tl, Port::Corner(c)))
                }
            }
            (Item::Corner(l1), Item::Corner(l2)) => {
                if l1 == l2 {
                    return Err(chart_err(
                        "arc enters and leaves an edge-flip quad at the same corner; \
                         the drawing is degenerate",
                    ));
                }
                for tid in [rec.t1, rec.t2] {
                    if let (Some(c1), Some(c2)) = (corner_in(tid, l1), corner_in(tid, l2)) {
                        return Ok(vec![Seg {
                            tri: tid,
                            enter: Port::Corner(c1),
                            exit: Port::Corner(c2),
                        }]);
                    }
                }
                let c1t = [rec.t1, rec.t2]
                    .into_iter()
                    .find(|tid| corner_in(*tid, l1).is_some())
                    .ok_or_else(|| {
                        chart_err("edge flip bookkeeping failed: lost a quad corner")
                    })?;
                let c2t = if c1t == rec.t1 { rec.t2 } else { rec.t1 };
                let c1 = corner_in(c1t, l1).unwrap();
                let c2 = corner_in(c2t, l2).ok_or_else(|| {
                    chart_err("edge flip bookkeeping failed: lost a quad corner")
                })?;
                Ok(two(c1t, Port::Corner(c1), c2t, Port::Corner(c2)))
            }
            _ => Err(chart_err(
                "edge flip bookkeeping failed: run bounded by an internal crossing",
            )),
        }
    };

    // Order of traversal: for closed curves start outside the quad so
    // runs do not wrap around the end of the list.
    let order: Vec<usize> = if closed {
        match segs.iter().position(|s| !in_quad(s)) {
            // Entirely inside the quad disk: contractible.
            None => return Ok(Vec::new()),
            Some(first) => (0..segs.len())
                .map(|i| (first + i) % segs.len())
                .collect(),
        }
    } else {
        (0..segs.len()).collect()
    };

    let mut out: Vec<Seg> = Vec::with_capacity(segs.len() + 2);
    let mut idx = 0;
    while idx < order.len() {
        let seg = &segs[order[idx]];
        if !in_quad(seg) {
            out.push(*seg);
            idx += 1;
            continue;
        }
        let start = classify(seg, seg.enter);
        let end;
        loop {
            if idx >= order.len() {
                return Err(chart_err(
                    "edge flip bookkeeping failed: run through the quad never ends",
                ));
            }
            let cur = &segs[order[idx]];
            debug_assert!(in_quad(cur));
            let e = classify(cur, cur.exit);
            idx += 1;
            if e != Item::Internal {
                end = e;
                break;
            }
        }
        out.extend(rewrite(start, end)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves;
    use serde_json::json;

    /// Annulus as a unit square with its vertical sides glued: no
    /// flips, one diagonal.
    fn square_annulus_json(curves: Value) -> Value {
        json!({
            "surface": {
                "polygons": [{"id": "sq", "sides": ["b", "r", "t", "l"]}],
                "identifications": [
                    [{"polygon": "sq", "index": 1}, {"polygon": "sq", "index": 3}, "reversed"]
                ]
            },
            "layouts": [
                {"id": "sq", "corners": [[0, 0], [1, 0], [1, 1], [0, 1]]}
            ],
            "curves": curves
        })
    }

    /// Annulus as a hexagon with sides 2 and 5 glued: the fan diagonal
    /// (0, 2) starts as a loop edge and is flipped away, so curves here
    /// exercise the flip replay.
    fn hex_annulus_json(curves: Value) -> Value {
        json!({
            "surface": {
                "polygons": [{"id": "hex", "sides": ["s0", "s1", "s2", "s3", "s4", "s5"]}],
                "identifications": [
                    [{"polygon": "hex", "index": 2}, {"polygon": "hex", "index": 5}, "reversed"]
                ]
            },
            "layouts": [
                {"id": "hex", "corners": [[0, 0], [2, 0], [3, 1], [3, 2], [2, 3], [0, 3]]}
            ],
            "curves": curves
        })
    }

    fn build(v: Value) -> Chart {
        ChartBundle::from_value(&v).unwrap().build().unwrap()
    }

    fn build_err(v: Value) -> Error {
        match ChartBundle::from_value(&v).and_then(|b| b.build()) {
            Ok(_) => panic!("chart built but an error was expected"),
            Err(e) => e,
        }
    }

    #[test]
    fn square_annulus_core_matches_collar() {
        let chart = build(square_annulus_json(json!([
            {"name": "core", "closed": true, "path": [
                {"hop": [["sq", 1, [1, "1/2"]], ["sq", 3, [0, "1/2"]]]}
            ]}
        ])));
        let t = &chart.triangulation;
        let core = chart.curve("core").unwrap();
        assert_eq!(core.segs.len(), 2);
        let collar = curves::boundary_collar(t, 0).unwrap();
        assert!(curves::is_isotopic(t, core, &collar).unwrap());
    }

    #[test]
    fn square_annulus_cross_arc() {
        let chart = build(square_annulus_json(json!([
            {"name": "core", "closed": true, "path": [
                {"hop": [["sq", 1, [1, "1/2"]], ["sq", 3, [0, "1/2"]]]}
            ]},
            {"name": "cross", "closed": false, "path": [
                {"corner": ["sq", 1]},
                {"corner": ["sq", 3]}
            ]}
        ])));
        let t = &chart.triangulation;
        let cross = chart.curve("cross").unwrap();
        let core = chart.curve("core").unwrap();
        // The straight chord from corner 1 to corner 3 crosses the fan
        // diagonal once.
        assert_eq!(cross.segs.len(), 2);
        let [a, b] = cross.endpoints.unwrap();
        assert_ne!(a, b);
        assert_eq!(curves::geometric_intersection(t, cross, core).unwrap(), 1);
    }

    #[test]
    fn hex_annulus_flip_replay_core() {
        let chart = build(hex_annulus_json(json!([
            {"name": "core", "closed": true, "path": [
                {"hop": [["hex", 2, [3, "3/2"]], ["hex", 5, [0, "3/2"]]]}
            ]},
            {"name": "wavy", "closed": true, "path": [
                {"hop": [["hex", 2, [3, "3/2"]], ["hex", 5, [0, "3/2"]]]},
                {"in": ["hex", ["5/2", "3/4"]]}
            ]}
        ])));
        let t = &chart.triangulation;
        assert!(!t.provenance.flips.is_empty());
        let core = chart.curve("core").unwrap();
        let collar = curves::boundary_collar(t, 0).unwrap();
        assert!(curves::is_isotopic(t, core, &collar).unwrap());
        // The wavy drawing dips across the flipped diagonal and back; it
        // is the same curve up to isotopy.
        let wavy = chart.curve("wavy").unwrap();
        assert!(curves::is_isotopic(t, core, wavy).unwrap());
    }

    #[test]
    fn hex_annulus_flip_replay_arc() {
        let chart = build(hex_annulus_json(json!([
            {"name": "core", "closed": true, "path": [
                {"hop": [["hex", 2, [3, "3/2"]], ["hex", 5, [0, "3/2"]]]}
            ]},
            {"name": "rung", "closed": false, "path": [
                {"corner": ["hex", 1]},
                {"corner": ["hex", 4]}
            ]}
        ])));
        let t = &chart.triangulation;
        let rung = chart.curve("rung").unwrap();
        let core = chart.curve("core").unwrap();
        let [a, b] = rung.endpoints.unwrap();
        assert_ne!(a, b);
        assert_eq!(curves::geometric_intersection(t, rung, core).unwrap(), 1);
    }

    #[test]
    fn flipped_polygon_rejected() {
        // Two squares glued with a "same" identification: the surface
        // builds (the builder flips one polygon) but a chart cannot use
        // the drawn coordinates.
        let v = json!({
            "surface": {
                "polygons": [
                    {"id": "a", "sides": ["a0", "a1", "a2", "a3"]},
                    {"id": "b", "sides": ["b0", "b1", "b2", "b3"]}
                ],
                "identifications": [
                    [{"polygon": "a", "index": 1}, {"polygon": "b", "index": 1}, "same"]
                ]
            },
            "layouts": [
                {"id": "a", "corners": [[0, 0], [1, 0], [1, 1], [0, 1]]},
                {"id": "b", "corners": [[2, 0], [3, 0], [3, 1], [2, 1]]}
            ],
            "curves": []
        });
        let err = build_err(v);
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");
    }

    #[test]
    fn degenerate_drawings_rejected() {
        // Waypoint on the fan diagonal.
        let err = build_err(square_annulus_json(json!([
            {"name": "bad", "closed": true, "path": [
                {"hop": [["sq", 1, [1, "1/2"]], ["sq", 3, [0, "1/2"]]]},
                {"in": ["sq", ["1/2", "1/2"]]}
            ]}
        ])));
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");

        // Hop endpoints that disagree under the reversed identification.
        let err = build_err(square_annulus_json(json!([
            {"name": "bad", "closed": true, "path": [
                {"hop": [["sq", 1, [1, "1/2"]], ["sq", 3, [0, "1/4"]]]}
            ]}
        ])));
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");

        // Hop through sides that are not identified.
        let err = build_err(square_annulus_json(json!([
            {"name": "bad", "closed": true, "path": [
                {"hop": [["sq", 0, ["1/2", 0]], ["sq", 2, ["1/2", 1]]]}
            ]}
        ])));
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");

        // Arc leaving a corner along its own diagonal.
        let err = build_err(square_annulus_json(json!([
            {"name": "bad", "closed": false, "path": [
                {"corner": ["sq", 2]},
                {"in": ["sq", ["1/4", "1/4"]]},
                {"corner": ["sq", 0]}
            ]}
        ])));
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");

        // Clockwise layout.
        let err = build_err(json!({
            "surface": {
                "polygons": [{"id": "sq", "sides": ["b", "r", "t", "l"]}],
                "identifications": [
                    [{"polygon": "sq", "index": 1}, {"polygon": "sq", "index": 3}, "reversed"]
                ]
            },
            "layouts": [
                {"id": "sq", "corners": [[0, 0], [0, 1], [1, 1], [1, 0]]}
            ],
            "curves": []
        }));
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");

        // Self-intersecting layout.
        let err = build_err(json!({
            "surface": {
                "polygons": [{"id": "sq", "sides": ["b", "r", "t", "l"]}],
                "identifications": [
                    [{"polygon": "sq", "index": 1}, {"polygon": "sq", "index": 3}, "reversed"]
                ]
            },
            "layouts": [
                {"id": "sq", "corners": [[0, 0], [1, 1], [1, 0], [0, 1]]}
            ],
            "curves": []
        }));
        assert!(matches!(err, Error::Chart { .. }), "got {err:?}");
    }

    #[test]
    fn two_drawings_of_the_same_arc_agree() {
        let whole = |curves: Value| build(square_annulus_json(curves));
        let c1 = whole(json!([
            {"name": "x", "closed": false, "path": [
                {"corner": ["sq", 1]},
                {"in": ["sq", ["3/4", "1/2"]]},
                {"corner": ["sq", 3]}
            ]}
        ]));
        // Same arc drawn with a double back-and-forth across the
        // diagonal: three crossings reduce to one.
        let c2 = whole(json!([
            {"name": "x", "closed": false, "path": [
                {"corner": ["sq", 1]},
                {"in": ["sq", ["1/8", "1/4"]]},
                {"in": ["sq", ["1/4", "1/8"]]},
                {"in": ["sq", ["1/8", "1/2"]]},
                {"corner": ["sq", 3]}
            ]}
        ]));
        let t = &c1.triangulation;
        assert_eq!(t.hash(), c2.triangulation.hash());
        let a = c1.curve("x").unwrap();
        let b = c2.curve("x").unwrap();
        assert!(curves::is_isotopic(t, a, b).unwrap());
    }
}
