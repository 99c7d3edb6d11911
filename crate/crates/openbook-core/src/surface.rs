//! Triangulated compact oriented surfaces with boundary.
//!
//! A surface is described by a [`PolygonSpec`]: a list of polygons (each a
//! disk whose boundary is a cyclic list of named sides) together with
//! side identifications.  The builder fans each polygon from its first
//! corner, glues the fans, and then normalizes the triangulation by edge
//! flips so that
//!
//! * no interior edge has equal endpoints (interior edges double as the
//!   test arcs of the Alexander method, which needs arcs with distinct
//!   endpoints), and
//! * no triangle has two boundary sides (so that boundary collar curves
//!   admit crossing sequences in which every strand cuts a single corner).
//!
//! Every vertex must lie on the boundary; specs whose gluings create
//! interior vertices are rejected.  Orientation is encoded by listing
//! polygon corners counterclockwise; the builder checks that the
//! identifications admit a coherent orientation and flips polygons as
//! needed (recorded in [`Provenance`]), rejecting non-orientable input.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type TriId = usize;

/// One polygon of a surface spec: an id and the cyclic list of side names.
/// Corner `i` sits between side `i-1` and side `i`; side `i` runs from
/// corner `i` to corner `i+1` (indices mod the number of sides).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonDecl {
    pub id: String,
    pub sides: Vec<String>,
}

/// Reference to one side occurrence of one polygon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideRef {
    pub polygon: String,
    pub index: usize,
}

/// Whether an identification matches the listed side directions or
/// reverses them.  Gluing counterclockwise polygons orientably always
/// reverses; "same" forces the builder to flip one of the polygons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GluingDirection {
    Same,
    Reversed,
}

/// A single side identification, serialized as `[a, b, "same"|"reversed"]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identification(pub SideRef, pub SideRef, pub GluingDirection);

/// Input description of a surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub polygons: Vec<PolygonDecl>,
    pub identifications: Vec<Identification>,
}

/// One side of a triangle: the underlying edge, and whether the side's
/// direction (corner `k` to corner `k+1`) agrees with the edge's canonical
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriSide {
    pub edge: EdgeId,
    pub forward: bool,
}

/// A triangle, corners listed counterclockwise.  Side `k` runs from corner
/// `k` to corner `k+1` (mod 3).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub corners: [VertexId; 3],
    pub sides: [TriSide; 3],
}

impl Triangle {
    /// Index of the side carrying `edge`, starting the search at side
    /// `start`.  Panics if absent.
    pub fn side_with_edge(&self, edge: EdgeId) -> u8 {
        for k in 0..3 {
            if self.sides[k].edge == edge {
                return k as u8;
            }
        }
        panic!("triangle does not contain edge {edge}");
    }
}

/// An edge with a canonical direction.  `left` is the incidence traversing
/// the edge forward (the triangle interior lies to the left of a directed
/// side of a counterclockwise triangle); boundary edges have `right: None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub left: (TriId, u8),
    pub right: Option<(TriId, u8)>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.right.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub boundary_component: usize,
}

/// The triangles around a boundary vertex, walked from the incoming
/// boundary edge to the outgoing one.  `triangles[i]` is `(triangle,
/// corner index of the vertex in it)`; `interior_edges[i]` separates fan
/// entries `i` and `i+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexFan {
    pub boundary_in: EdgeId,
    pub boundary_out: EdgeId,
    pub triangles: Vec<(TriId, u8)>,
    pub interior_edges: Vec<EdgeId>,
}

/// Record of one edge flip, kept so that chart-converted curve data can be
/// replayed through the same normalization the builder performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipRecord {
    pub edge: EdgeId,
    pub t1: TriId,
    pub t2: TriId,
    pub old_t1: Triangle,
    pub old_t2: Triangle,
    pub new_t1: Triangle,
    pub new_t2: Triangle,
}

/// How the built triangulation relates to the input polygons; used by the
/// chart converter to translate geometric drawings into crossing data.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub polygon_ids: Vec<String>,
    /// (polygon index, corner index) -> vertex id.
    pub corner_vertex: BTreeMap<(usize, usize), VertexId>,
    /// (polygon index, fan triangle index) -> triangle id, pre-flip.
    pub fan_triangle: BTreeMap<(usize, usize), TriId>,
    /// (polygon index, side index) -> edge id.
    pub side_edge: BTreeMap<(usize, usize), EdgeId>,
    pub flipped_polygons: Vec<bool>,
    pub flips: Vec<FlipRecord>,
}

/// A triangulated oriented surface, all vertices on the boundary.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    pub vertices: Vec<Vertex>,
    pub n_boundary_components: usize,
    pub provenance: Provenance,
    fans: Vec<VertexFan>,
    hash: String,
    pub(crate) h1_cache: OnceLock<crate::invariants::H1Data>,
}

/// Classification data of a connected surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub genus: usize,
    pub boundary_components: usize,
    pub euler: i64,
}

impl Triangulation {
    /// Stable identifier of the page; curves and words are pinned to it.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn fan(&self, v: VertexId) -> &VertexFan {
        &self.fans[v]
    }

    /// The triangle on the other side of interior edge `e` from `t`, along
    /// with the side index of `e` there.
    pub fn neighbor_across(&self, e: EdgeId, t: TriId) -> (TriId, u8) {
        let edge = &self.edges[e];
        let right = edge.right.expect("boundary edge has no neighbor");
        if edge.left.0 == t && edge.right.map(|r| r.0) != Some(t) {
            right
        } else if right.0 == t && edge.left.0 != t {
            edge.left
        } else {
            // Both incidences on the same triangle cannot happen for the
            // triangulations the builder accepts.
            panic!("ambiguous neighbor across edge {e}");
        }
    }

    pub fn interior_edge_ids(&self) -> Vec<EdgeId> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].is_interior())
            .collect()
    }

    /// Boundary edges of one component, in boundary orientation.
    pub fn boundary_cycle(&self, component: usize) -> Vec<EdgeId> {
        let start = (0..self.edges.len())
            .find(|&e| {
                !self.edges[e].is_interior()
                    && self.vertices[self.edges[e].from].boundary_component == component
            })
            .expect("boundary component has no edges");
        let mut cycle = vec![start];
        let mut cur = self.edges[start].to;
        while cur != self.edges[start].from {
            let next = self.fans[cur].boundary_out;
            cycle.push(next);
            cur = self.edges[next].to;
        }
        cycle
    }

    /// JSON export of the combinatorics (used for bundles and hashing).
    pub fn to_json(&self) -> serde_json::Value {
        let triangles: Vec<serde_json::Value> = self
            .triangles
            .iter()
            .map(|t| {
                serde_json::json!({
                    "corners": t.corners,
                    "sides": t.sides.iter().map(|s| serde_json::json!([s.edge, s.forward])).collect::<Vec<_>>(),
                })
            })
            .collect();
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| serde_json::json!([e.from, e.to, e.is_interior()]))
            .collect();
        let vertices: Vec<usize> = self.vertices.iter().map(|v| v.boundary_component).collect();
        serde_json::json!({
            "triangles": triangles,
            "edges": edges,
            "vertices": vertices,
            "boundary_components": self.n_boundary_components,
        })
    }

    /// Rebuild derived data (boundary components, fans, hash) from
    /// `triangles`/`edges`.  Used by the builder and by stabilization.
    pub(crate) fn from_parts(
        triangles: Vec<Triangle>,
        edges: Vec<Edge>,
        n_vertices: usize,
        provenance: Provenance,
    ) -> Result<Triangulation> {
        // Validate orientation coherence: interior edges have one forward
        // and one backward incidence, and the incidence data is mutual.
        for (eid, edge) in edges.iter().enumerate() {
            let (t, k) = edge.left;
            let tri = &triangles[t];
            if tri.sides[k as usize].edge != eid || !tri.sides[k as usize].forward {
                return Err(Error::InvalidSpec {
                    reason: format!("edge {eid} left incidence is inconsistent"),
                });
            }
            if tri.corners[k as usize] != edge.from
                || tri.corners[(k as usize + 1) % 3] != edge.to
            {
                return Err(Error::InvalidSpec {
                    reason: format!("edge {eid} endpoints disagree with its left triangle"),
                });
            }
            if let Some((t2, k2)) = edge.right {
                let tri2 = &triangles[t2];
                if tri2.sides[k2 as usize].edge != eid || tri2.sides[k2 as usize].forward {
                    return Err(Error::NonOrientableGluing {
                        detail: format!("edge {eid} has two coherent incidences"),
                    });
                }
                if tri2.corners[k2 as usize] != edge.to
                    || tri2.corners[(k2 as usize + 1) % 3] != edge.from
                {
                    return Err(Error::InvalidSpec {
                        reason: format!("edge {eid} endpoints disagree with its right triangle"),
                    });
                }
            }
        }

        // Boundary tracing: every vertex needs exactly one outgoing and one
        // incoming boundary edge (other counts mean a pinched or interior
        // vertex).
        let mut out_edge = vec![usize::MAX; n_vertices];
        let mut in_edge = vec![usize::MAX; n_vertices];
        for (eid, edge) in edges.iter().enumerate() {
            if edge.is_interior() {
                continue;
            }
            if out_edge[edge.from] != usize::MAX || in_edge[edge.to] != usize::MAX {
                return Err(Error::InvalidSpec {
                    reason: format!("vertex {} is pinched on the boundary", edge.from),
                });
            }
            out_edge[edge.from] = eid;
            in_edge[edge.to] = eid;
        }
        for v in 0..n_vertices {
            if out_edge[v] == usize::MAX || in_edge[v] == usize::MAX {
                return Err(Error::InvalidSpec {
                    reason: format!("vertex {v} does not lie on the boundary"),
                });
            }
        }
        let mut component = vec![usize::MAX; n_vertices];
        let mut n_components = 0;
        for v0 in 0..n_vertices {
            if component[v0] != usize::MAX {
                continue;
            }
            let c = n_components;
            n_components += 1;
            let mut v = v0;
            loop {
                component[v] = c;
                v = edges[out_edge[v]].to;
                if v == v0 {
                    break;
                }
            }
        }
        let vertices: Vec<Vertex> = component
            .iter()
            .map(|&c| Vertex {
                boundary_component: c,
            })
            .collect();

        // Vertex fans.  Count corners per vertex to detect pinched links.
        let mut corner_count = vec![0usize; n_vertices];
        for tri in &triangles {
            for &c in &tri.corners {
                corner_count[c] += 1;
            }
        }
        let mut fans = Vec::with_capacity(n_vertices);
        for v in 0..n_vertices {
            let b_in = in_edge[v];
            let b_out = out_edge[v];
            let (mut t, k) = edges[b_in].left;
            let mut corner = (k + 1) % 3;
            let mut fan_tris = vec![(t, corner)];
            let mut fan_edges = Vec::new();
            loop {
                let side = triangles[t].sides[corner as usize];
                if !edges[side.edge].is_interior() {
                    if side.edge != b_out {
                        return Err(Error::InvalidSpec {
                            reason: format!("boundary walk around vertex {v} is inconsistent"),
                        });
                    }
                    break;
                }
                fan_edges.push(side.edge);
                let (t2, m) = if side.forward {
                    edges[side.edge].right.unwrap()
                } else {
                    edges[side.edge].left
                };
                t = t2;
                corner = (m + 1) % 3;
                fan_tris.push((t, corner));
                if fan_tris.len() > triangles.len() * 3 + 3 {
                    return Err(Error::InvalidSpec {
                        reason: format!("fan walk around vertex {v} does not terminate"),
                    });
                }
            }
            if fan_tris.len() != corner_count[v] {
                return Err(Error::InvalidSpec {
                    reason: format!("vertex {v} has a pinched link"),
                });
            }
            fans.push(VertexFan {
                boundary_in: b_in,
                boundary_out: b_out,
                triangles: fan_tris,
                interior_edges: fan_edges,
            });
        }

        let mut t = Triangulation {
            triangles,
            edges,
            vertices,
            n_boundary_components: n_components,
            provenance,
            fans,
            hash: String::new(),
            h1_cache: OnceLock::new(),
        };
        t.hash = crate::canonical_json_sha256(&t.to_json());
        Ok(t)
    }
}

/// Euler characteristic `V - E + T`.
pub fn euler_characteristic(t: &Triangulation) -> i64 {
    t.vertices.len() as i64 - t.edges.len() as i64 + t.triangles.len() as i64
}

/// Genus and boundary count of the (connected) surface.
pub fn classify(t: &Triangulation) -> SurfaceClass {
    let chi = euler_characteristic(t);
    let b = t.n_boundary_components as i64;
    let twog = 2 - chi - b;
    debug_assert!(twog >= 0 && twog % 2 == 0, "classification is inconsistent");
    SurfaceClass {
        genus: (twog / 2) as usize,
        boundary_components: t.n_boundary_components,
        euler: chi,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Where polygon side `s` of an `n`-gon sits in the fan: (fan triangle
/// index, side index within the triangle).
pub(crate) fn side_slot(n: usize, s: usize) -> (usize, usize) {
    if n == 3 {
        return (0, s);
    }
    if s == 0 {
        (0, 0)
    } else if s == n - 1 {
        (n - 3, 2)
    } else {
        (s - 1, 1)
    }
}

/// Build a triangulated surface from a polygon spec.
pub fn build_surface(spec: &PolygonSpec) -> Result<Triangulation> {
    if spec.polygons.is_empty() {
        return Err(Error::InvalidSpec {
            reason: "no polygons".into(),
        });
    }
    let mut index_of = BTreeMap::new();
    for (i, p) in spec.polygons.iter().enumerate() {
        if p.sides.len() < 3 {
            return Err(Error::InvalidSpec {
                reason: format!("polygon {} has fewer than 3 sides", p.id),
            });
        }
        if index_of.insert(p.id.clone(), i).is_some() {
            return Err(Error::InvalidSpec {
                reason: format!("duplicate polygon id {}", p.id),
            });
        }
    }
    let lookup = |r: &SideRef| -> Result<(usize, usize)> {
        let &p = index_of.get(&r.polygon).ok_or_else(|| Error::InvalidSpec {
            reason: format!("unknown polygon {}", r.polygon),
        })?;
        if r.index >= spec.polygons[p].sides.len() {
            return Err(Error::InvalidSpec {
                reason: format!("side index {} out of range for polygon {}", r.index, r.polygon),
            });
        }
        Ok((p, r.index))
    };
    let mut glued: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut idents = Vec::new();
    for ident in &spec.identifications {
        let a = lookup(&ident.0)?;
        let b = lookup(&ident.1)?;
        if a == b {
            return Err(Error::InvalidSpec {
                reason: format!("side {:?} glued to itself", ident.0),
            });
        }
        for side in [a, b] {
            if !glued.insert(side) {
                return Err(Error::InvalidSpec {
                    reason: format!("side occurs in more than one identification: {side:?}"),
                });
            }
        }
        idents.push((a, b, ident.2));
    }

    // Connectivity of the polygon complex.
    let n_poly = spec.polygons.len();
    let mut poly_uf = UnionFind::new(n_poly);
    for &((pa, _), (pb, _), _) in &idents {
        poly_uf.union(pa, pb);
    }
    let root0 = poly_uf.find(0);
    for p in 1..n_poly {
        if poly_uf.find(p) != root0 {
            return Err(Error::Disconnected);
        }
    }
    if glued.len() == spec.polygons.iter().map(|p| p.sides.len()).sum::<usize>() {
        return Err(Error::ClosedSurface);
    }

    // Orientation: 2-color polygon flips so every identification reverses
    // side directions.
    let mut flip = vec![None::<bool>; n_poly];
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n_poly];
    for &((pa, sa), (pb, sb), dir) in &idents {
        let opposite = dir == GluingDirection::Same;
        if pa == pb {
            if opposite {
                return Err(Error::NonOrientableGluing {
                    detail: format!(
                        "sides {sa} and {sb} of polygon {} glued direction-preserving",
                        spec.polygons[pa].id
                    ),
                });
            }
            continue;
        }
        adj[pa].push((pb, opposite));
        adj[pb].push((pa, opposite));
    }
    for start in 0..n_poly {
        if flip[start].is_some() {
            continue;
        }
        flip[start] = Some(false);
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            let fp = flip[p].unwrap();
            for &(q, opposite) in &adj[p] {
                let want = fp ^ opposite;
                match flip[q] {
                    None => {
                        flip[q] = Some(want);
                        stack.push(q);
                    }
                    Some(fq) if fq != want => {
                        return Err(Error::NonOrientableGluing {
                            detail: format!(
                                "polygons {} and {} cannot be oriented coherently",
                                spec.polygons[p].id, spec.polygons[q].id
                            ),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let flip: Vec<bool> = flip.into_iter().map(|f| f.unwrap()).collect();

    // Normalize to flipped polygons: side s of a flipped n-gon becomes side
    // n-1-s with reversed direction; corner i becomes corner (n-i) mod n.
    let side_count: Vec<usize> = spec.polygons.iter().map(|p| p.sides.len()).collect();
    let norm_side = |p: usize, s: usize| -> usize {
        if flip[p] {
            side_count[p] - 1 - s
        } else {
            s
        }
    };
    let mut norm_idents = Vec::new();
    for &((pa, sa), (pb, sb), dir) in &idents {
        let toggles = flip[pa] ^ flip[pb];
        let eff = match (dir, toggles) {
            (GluingDirection::Reversed, false) | (GluingDirection::Same, true) => {
                GluingDirection::Reversed
            }
            _ => GluingDirection::Same,
        };
        debug_assert_eq!(eff, GluingDirection::Reversed, "flip coloring failed");
        norm_idents.push(((pa, norm_side(pa, sa)), (pb, norm_side(pb, sb))));
    }
    let mut glued_norm: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in &norm_idents {
        glued_norm.insert(a);
        glued_norm.insert(b);
    }

    // Vertex classes from corner identifications: gluing side (pa, sa) to
    // (pb, sb) reversed matches corner sa with sb+1 and corner sa+1 with sb.
    let offset: Vec<usize> = side_count
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let total_corners: usize = side_count.iter().sum();
    let mut uf = UnionFind::new(total_corners);
    for &((pa, sa), (pb, sb)) in &norm_idents {
        let na = side_count[pa];
        let nb = side_count[pb];
        uf.union(offset[pa] + sa, offset[pb] + (sb + 1) % nb);
        uf.union(offset[pa] + (sa + 1) % na, offset[pb] + sb);
    }
    let mut vertex_of_slot = vec![usize::MAX; total_corners];
    let mut n_vertices = 0;
    for slot in 0..total_corners {
        let r = uf.find(slot);
        if vertex_of_slot[r] == usize::MAX {
            vertex_of_slot[r] = n_vertices;
            n_vertices += 1;
        }
        vertex_of_slot[slot] = vertex_of_slot[r];
    }

    // Every vertex class must touch an unglued side.
    for p in 0..n_poly {
        let n = side_count[p];
        for i in 0..n {
            let class = vertex_of_slot[offset[p] + i];
            let mut on_boundary = false;
            'outer: for q in 0..n_poly {
                let m = side_count[q];
                for j in 0..m {
                    if vertex_of_slot[offset[q] + j] != class {
                        continue;
                    }
                    let prev = (j + m - 1) % m;
                    if !glued_norm.contains(&(q, j)) || !glued_norm.contains(&(q, prev)) {
                        on_boundary = true;
                        break 'outer;
                    }
                }
            }
            if !on_boundary {
                // Report with the original (pre-flip) corner numbering.
                let orig = if flip[p] { (n - i) % n } else { i };
                return Err(Error::InteriorVertex {
                    polygon: spec.polygons[p].id.clone(),
                    corner: orig,
                });
            }
        }
    }

    // Fan triangulation.  Triangle `f` of an n-gon has corners (0, f+1, f+2).
    let corner_vertex_at =
        |p: usize, i: usize| -> VertexId { vertex_of_slot[offset[p] + (i % side_count[p])] };
    let mut tri_of_fan: BTreeMap<(usize, usize), TriId> = BTreeMap::new();
    let mut triangles: Vec<Triangle> = Vec::new();
    for p in 0..n_poly {
        let n = side_count[p];
        for f in 0..n - 2 {
            tri_of_fan.insert((p, f), triangles.len());
            triangles.push(Triangle {
                corners: [
                    corner_vertex_at(p, 0),
                    corner_vertex_at(p, f + 1),
                    corner_vertex_at(p, f + 2),
                ],
                // Sides are filled in once edges exist.
                sides: [TriSide {
                    edge: usize::MAX,
                    forward: true,
                }; 3],
            });
        }
    }

    let mut edges: Vec<Edge> = Vec::new();
    let assign = |triangles: &mut Vec<Triangle>,
                  tri: TriId,
                  k: usize,
                  edge: EdgeId,
                  forward: bool| {
        triangles[tri].sides[k] = TriSide { edge, forward };
    };
    let mut side_edge: BTreeMap<(usize, usize), EdgeId> = BTreeMap::new();
    // Interior edges from identifications, in identification order.
    for &((pa, sa), (pb, sb)) in &norm_idents {
        let eid = edges.len();
        let (fa, ka) = side_slot(side_count[pa], sa);
        let (fb, kb) = side_slot(side_count[pb], sb);
        let ta = tri_of_fan[&(pa, fa)];
        let tb = tri_of_fan[&(pb, fb)];
        let from = corner_vertex_at(pa, sa);
        let to = corner_vertex_at(pa, sa + 1);
        debug_assert_eq!(corner_vertex_at(pb, sb), to);
        debug_assert_eq!(corner_vertex_at(pb, sb + 1), from);
        edges.push(Edge {
            from,
            to,
            left: (ta, ka as u8),
            right: Some((tb, kb as u8)),
        });
        assign(&mut triangles, ta, ka, eid, true);
        assign(&mut triangles, tb, kb, eid, false);
        side_edge.insert((pa, sa), eid);
        side_edge.insert((pb, sb), eid);
    }
    // Boundary edges from unglued sides.
    for p in 0..n_poly {
        for s in 0..side_count[p] {
            if glued_norm.contains(&(p, s)) {
                continue;
            }
            let eid = edges.len();
            let (f, k) = side_slot(side_count[p], s);
            let t = tri_of_fan[&(p, f)];
            edges.push(Edge {
                from: corner_vertex_at(p, s),
                to: corner_vertex_at(p, s + 1),
                left: (t, k as u8),
                right: None,
            });
            assign(&mut triangles, t, k, eid, true);
            side_edge.insert((p, s), eid);
        }
    }
    // Fan diagonals: apex to corner i, forward in fan triangle i-1 (side 0),
    // backward in fan triangle i-2 (side 2).
    for p in 0..n_poly {
        let n = side_count[p];
        for i in 2..n - 1 {
            let eid = edges.len();
            let t_fwd = tri_of_fan[&(p, i - 1)];
            let t_bwd = tri_of_fan[&(p, i - 2)];
            edges.push(Edge {
                from: corner_vertex_at(p, 0),
                to: corner_vertex_at(p, i),
                left: (t_fwd, 0),
                right: Some((t_bwd, 2)),
            });
            assign(&mut triangles, t_fwd, 0, eid, true);
            assign(&mut triangles, t_bwd, 2, eid, false);
        }
    }
    debug_assert!(triangles
        .iter()
        .all(|t| t.sides.iter().all(|s| s.edge != usize::MAX)));

    let mut corner_vertex = BTreeMap::new();
    for p in 0..n_poly {
        let n = side_count[p];
        for i in 0..n {
            // Record with original corner numbering so charts can use it.
            let norm_i = if flip[p] { (n - i) % n } else { i };
            corner_vertex.insert((p, i), corner_vertex_at(p, norm_i));
        }
    }
    let mut provenance = Provenance {
        polygon_ids: spec.polygons.iter().map(|p| p.id.clone()).collect(),
        corner_vertex,
        fan_triangle: tri_of_fan,
        side_edge,
        flipped_polygons: flip,
        flips: Vec::new(),
    };

    flip_pass(&mut triangles, &mut edges, n_vertices, &mut provenance.flips)?;
    Triangulation::from_parts(triangles, edges, n_vertices, provenance)
}

/// Flip interior loop edges and (where possible) the interior edges of
/// triangles with two boundary sides.  Loop edges must all be removed;
/// stubborn two-boundary-side triangles are tolerated only on disk
/// components, where collar curves are never required.
fn flip_pass(
    triangles: &mut [Triangle],
    edges: &mut Vec<Edge>,
    n_vertices: usize,
    flips: &mut Vec<FlipRecord>,
) -> Result<()> {
    let is_boundary = |edges: &[Edge], e: EdgeId| !edges[e].is_interior();
    let limit = 12 * edges.len() + 24;
    let mut steps = 0;
    loop {
        let loop_edge = (0..edges.len())
            .find(|&e| edges[e].is_interior() && edges[e].from == edges[e].to);
        let two_boundary = (0..triangles.len()).find(|&t| {
            triangles[t]
                .sides
                .iter()
                .filter(|s| is_boundary(edges, s.edge))
                .count()
                >= 2
        });
        let target = match (loop_edge, two_boundary) {
            (Some(e), _) => Some(e),
            (None, Some(t)) => {
                let interior: Vec<EdgeId> = triangles[t]
                    .sides
                    .iter()
                    .filter(|s| !is_boundary(edges, s.edge))
                    .map(|s| s.edge)
                    .collect();
                if interior.len() == 1 {
                    Some(interior[0])
                } else {
                    // A triangle with three boundary sides is a disk page;
                    // nothing to do.
                    None
                }
            }
            (None, None) => None,
        };
        let Some(e) = target else {
            return Ok(());
        };
        steps += 1;
        if steps > limit {
            // Loop edges are fatal; leftover two-boundary triangles are
            // acceptable only on disk components.
            if loop_edge.is_some() {
                return Err(Error::FlipLimitExceeded {
                    detail: "interior loop edges persist".into(),
                });
            }
            let chi = n_vertices as i64 - edges.len() as i64 + triangles.len() as i64;
            if chi == 1 {
                return Ok(());
            }
            return Err(Error::FlipLimitExceeded {
                detail: "triangles with two boundary sides persist".into(),
            });
        }
        flip_edge(triangles, edges, e, flips)?;
    }
}

fn flip_edge(
    triangles: &mut [Triangle],
    edges: &mut [Edge],
    e: EdgeId,
    flips: &mut Vec<FlipRecord>,
) -> Result<()> {
    let (t1, k1) = edges[e].left;
    let (t2, k2) = edges[e].right.ok_or(Error::FlipLimitExceeded {
        detail: format!("attempted to flip boundary edge {e}"),
    })?;
    if t1 == t2 {
        return Err(Error::FlipLimitExceeded {
            detail: format!("edge {e} is self-glued onto one triangle"),
        });
    }
    let old_t1 = triangles[t1].clone();
    let old_t2 = triangles[t2].clone();
    let k1 = k1 as usize;
    let k2 = k2 as usize;
    let u = old_t1.corners[k1];
    let w = old_t1.corners[(k1 + 1) % 3];
    let c = old_t1.corners[(k1 + 2) % 3];
    debug_assert_eq!(old_t2.corners[k2], w);
    debug_assert_eq!(old_t2.corners[(k2 + 1) % 3], u);
    let d = old_t2.corners[(k2 + 2) % 3];
    let side_y = old_t1.sides[(k1 + 1) % 3]; // w -> c
    let side_z = old_t1.sides[(k1 + 2) % 3]; // c -> u
    let side_w = old_t2.sides[(k2 + 1) % 3]; // u -> d
    let side_x = old_t2.sides[(k2 + 2) % 3]; // d -> w

    let new_t1 = Triangle {
        corners: [u, d, c],
        sides: [
            side_w,
            TriSide {
                edge: e,
                forward: false,
            },
            side_z,
        ],
    };
    let new_t2 = Triangle {
        corners: [d, w, c],
        sides: [
            side_x,
            side_y,
            TriSide {
                edge: e,
                forward: true,
            },
        ],
    };
    // Update incidences of the four outer edges.
    let mut relocate = |side: TriSide, new_pos: (TriId, u8)| {
        let edge = &mut edges[side.edge];
        if side.forward {
            edge.left = new_pos;
        } else {
            edge.right = Some(new_pos);
        }
    };
    relocate(side_w, (t1, 0));
    relocate(side_z, (t1, 2));
    relocate(side_x, (t2, 0));
    relocate(side_y, (t2, 1));
    edges[e].from = c;
    edges[e].to = d;
    edges[e].left = (t2, 2);
    edges[e].right = Some((t1, 1));
    triangles[t1] = new_t1.clone();
    triangles[t2] = new_t2.clone();
    flips.push(FlipRecord {
        edge: e,
        t1,
        t2,
        old_t1,
        old_t2,
        new_t1,
        new_t2,
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str) -> PolygonDecl {
        PolygonDecl {
            id: id.into(),
            sides: vec![
                format!("{id}-bottom"),
                format!("{id}-right"),
                format!("{id}-top"),
                format!("{id}-left"),
            ],
        }
    }

    fn sr(polygon: &str, index: usize) -> SideRef {
        SideRef {
            polygon: polygon.into(),
            index,
        }
    }

    #[test]
    fn square_disk() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![],
        };
        let t = build_surface(&spec).unwrap();
        let class = classify(&t);
        assert_eq!(class.genus, 0);
        assert_eq!(class.boundary_components, 1);
        assert_eq!(class.euler, 1);
        assert_eq!(euler_characteristic(&t), 1);
        assert_eq!(t.vertices.len(), 4);
        assert_eq!(t.triangles.len(), 2);
    }

    #[test]
    fn annulus_from_square() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![Identification(
                sr("sq", 1),
                sr("sq", 3),
                GluingDirection::Reversed,
            )],
        };
        let t = build_surface(&spec).unwrap();
        let class = classify(&t);
        assert_eq!(class.genus, 0);
        assert_eq!(class.boundary_components, 2);
        assert_eq!(class.euler, 0);
        assert!(t.provenance.flips.is_empty());
        assert!(t.provenance.flipped_polygons.iter().all(|&f| !f));
    }

    #[test]
    fn moebius_rejected() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![Identification(
                sr("sq", 1),
                sr("sq", 3),
                GluingDirection::Same,
            )],
        };
        match build_surface(&spec) {
            Err(Error::NonOrientableGluing { .. }) => {}
            other => panic!("expected NonOrientableGluing, got {other:?}"),
        }
    }

    #[test]
    fn torus_rejected_as_closed() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![
                Identification(sr("sq", 0), sr("sq", 2), GluingDirection::Reversed),
                Identification(sr("sq", 1), sr("sq", 3), GluingDirection::Reversed),
            ],
        };
        match build_surface(&spec) {
            Err(Error::ClosedSurface) => {}
            other => panic!("expected ClosedSurface, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_rejected() {
        let spec = PolygonSpec {
            polygons: vec![square("a"), square("b")],
            identifications: vec![],
        };
        match build_surface(&spec) {
            Err(Error::Disconnected) => {}
            other => panic!("expected Disconnected, got {other:?}"),
        }
    }

    #[test]
    fn cone_point_rejected() {
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "tri".into(),
                sides: vec!["a".into(), "b".into(), "c".into()],
            }],
            identifications: vec![Identification(
                sr("tri", 0),
                sr("tri", 1),
                GluingDirection::Reversed,
            )],
        };
        match build_surface(&spec) {
            Err(Error::InteriorVertex { corner, .. }) => assert_eq!(corner, 1),
            other => panic!("expected InteriorVertex, got {other:?}"),
        }
    }

    #[test]
    fn loop_edge_is_flipped_away() {
        // Hexagon with sides 2 and 5 glued: an annulus whose fan diagonal
        // (corner 0 to corner 2) starts as a loop edge.
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "hex".into(),
                sides: (0..6).map(|i| format!("s{i}")).collect(),
            }],
            identifications: vec![Identification(
                sr("hex", 2),
                sr("hex", 5),
                GluingDirection::Reversed,
            )],
        };
        let t = build_surface(&spec).unwrap();
        let class = classify(&t);
        assert_eq!((class.genus, class.boundary_components), (0, 2));
        assert!(!t.provenance.flips.is_empty());
        for e in t.interior_edge_ids() {
            assert_ne!(t.edges[e].from, t.edges[e].to, "loop edge survived");
        }
    }

    #[test]
    fn fans_cover_all_corners() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![Identification(
                sr("sq", 1),
                sr("sq", 3),
                GluingDirection::Reversed,
            )],
        };
        let t = build_surface(&spec).unwrap();
        let mut counted = 0;
        for v in 0..t.vertices.len() {
            let fan = t.fan(v);
            counted += fan.triangles.len();
            for (tri, corner) in &fan.triangles {
                assert_eq!(t.triangles[*tri].corners[*corner as usize], v);
            }
            assert_eq!(fan.interior_edges.len() + 1, fan.triangles.len());
        }
        assert_eq!(counted, t.triangles.len() * 3);
    }

    #[test]
    fn deterministic_hash() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![Identification(
                sr("sq", 1),
                sr("sq", 3),
                GluingDirection::Reversed,
            )],
        };
        let t1 = build_surface(&spec).unwrap();
        let t2 = build_surface(&spec).unwrap();
        assert_eq!(t1.hash(), t2.hash());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = PolygonSpec {
            polygons: vec![square("sq")],
            identifications: vec![Identification(
                sr("sq", 1),
                sr("sq", 3),
                GluingDirection::Reversed,
            )],
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"reversed\""));
        let back: PolygonSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
