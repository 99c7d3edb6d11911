//! Chart-bundle generators for the named curve systems.
//!
//! Every page in this crate is assembled from axis-aligned rectangles whose
//! top and bottom edges are subdivided at the endpoints of gluing intervals.
//! A literal rectangle would place several corners on one straight line,
//! which the chart validator rejects (corner fans must be strictly convex),
//! so each generator bows the subdivided chains outward onto a shallow
//! parabola.  The bowed polygon contains the original rectangle, hence every
//! waypoint can still be written in plain rectangle coordinates; only points
//! on the boundary itself (hop exits and entries) are projected onto the
//! bowed chords, which the helpers here do exactly.

use num_rational::Rational64;
use serde_json::{json, Value};

pub type Q = Rational64;

/// Shorthand for an exact rational coordinate.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn q_value(x: Q) -> Value {
    if *x.denom() == 1 {
        json!(*x.numer())
    } else {
        json!(format!("{}/{}", x.numer(), x.denom()))
    }
}

fn pt(p: (Q, Q)) -> Value {
    json!([q_value(p.0), q_value(p.1)])
}

/// One rectangle `[0, w] x [y_bottom, y_top]` whose horizontal edges are
/// subdivided at the interior points of `xs` (which must start with `0` and
/// end with `w`).  Sides are indexed counterclockwise: bottom pieces left to
/// right, the right edge, top pieces right to left, the left edge.
pub struct RectPage {
    pub id: String,
    pub xs: Vec<Q>,
    pub y_bottom: Q,
    pub y_top: Q,
}

impl RectPage {
    pub fn new(id: &str, xs: Vec<Q>, y_bottom: Q, y_top: Q) -> RectPage {
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        RectPage {
            id: id.to_string(),
            xs,
            y_bottom,
            y_top,
        }
    }

    fn width(&self) -> Q {
        *self.xs.last().unwrap()
    }

    /// Depth of the parabolic bow at `x`; zero at both ends, at most w/16.
    fn bow(&self, x: Q) -> Q {
        let w = self.width();
        x * (w - x) / (w * q(4, 1))
    }

    fn segment_count(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn side_count(&self) -> usize {
        2 * self.segment_count() + 2
    }

    pub fn right_side(&self) -> usize {
        self.segment_count()
    }

    pub fn left_side(&self) -> usize {
        2 * self.segment_count() + 1
    }

    /// Index of the bottom side whose open x-interval contains `x`.
    pub fn bottom_side(&self, x: Q) -> usize {
        let i = self.interval_of(x);
        i
    }

    /// Index of the top side whose open x-interval contains `x`.
    pub fn top_side(&self, x: Q) -> usize {
        let i = self.interval_of(x);
        self.segment_count() + 1 + (self.segment_count() - 1 - i)
    }

    fn interval_of(&self, x: Q) -> usize {
        for i in 0..self.segment_count() {
            if self.xs[i] < x && x < self.xs[i + 1] {
                return i;
            }
        }
        panic!("x = {x} is not interior to a horizontal side of {}", self.id);
    }

    fn bottom_corner(&self, i: usize) -> (Q, Q) {
        (self.xs[i], self.y_bottom - self.bow(self.xs[i]))
    }

    fn top_corner(&self, i: usize) -> (Q, Q) {
        (self.xs[i], self.y_top + self.bow(self.xs[i]))
    }

    /// Point with abscissa `x` on the bowed chord of the bottom edge.
    pub fn bottom_point(&self, x: Q) -> (Q, Q) {
        let i = self.interval_of(x);
        chord_at_x(self.bottom_corner(i), self.bottom_corner(i + 1), x)
    }

    /// Point with abscissa `x` on the bowed chord of the top edge.
    pub fn top_point(&self, x: Q) -> (Q, Q) {
        let i = self.interval_of(x);
        chord_at_x(self.top_corner(i), self.top_corner(i + 1), x)
    }

    pub fn right_point(&self, y: Q) -> (Q, Q) {
        (self.width(), y)
    }

    pub fn left_point(&self, y: Q) -> (Q, Q) {
        (q(0, 1), y)
    }

    pub fn polygon_decl(&self) -> Value {
        let n = self.segment_count();
        let mut names = Vec::new();
        for i in 0..n {
            names.push(format!("{}_b{}", self.id, i));
        }
        names.push(format!("{}_r", self.id));
        for i in 0..n {
            names.push(format!("{}_t{}", self.id, n - 1 - i));
        }
        names.push(format!("{}_l", self.id));
        json!({"id": self.id, "sides": names})
    }

    pub fn layout(&self) -> Value {
        let n = self.segment_count();
        let mut corners = Vec::new();
        for i in 0..=n {
            corners.push(pt(self.bottom_corner(i)));
        }
        for i in (0..=n).rev() {
            corners.push(pt(self.top_corner(i)));
        }
        json!({"id": self.id, "corners": corners})
    }
}

fn chord_at_x(a: (Q, Q), b: (Q, Q), x: Q) -> (Q, Q) {
    debug_assert!(a.0 != b.0);
    let t = (x - a.0) / (b.0 - a.0);
    (x, a.1 + t * (b.1 - a.1))
}

/// Reference to one polygon side as used in identifications.
pub fn side_ref(poly: &str, index: usize) -> Value {
    json!({"polygon": poly, "index": index})
}

pub fn reversed(a: Value, b: Value) -> Value {
    json!([a, b, "reversed"])
}

/// Incremental builder for one drawn curve.
pub struct Path {
    entries: Vec<Value>,
}

impl Path {
    pub fn new() -> Path {
        Path {
            entries: Vec::new(),
        }
    }

    pub fn inside(mut self, page: &RectPage, x: Q, y: Q) -> Path {
        self.entries.push(json!({"in": [page.id, pt((x, y))]}));
        self
    }

    pub fn corner(mut self, page: &RectPage, corner: usize) -> Path {
        self.entries.push(json!({"corner": [page.id, corner]}));
        self
    }

    /// Exit through `exit_side` of `from` at `exit_pt`, re-enter through
    /// `entry_side` of `to` at `entry_pt`.
    pub fn hop(
        mut self,
        from: &RectPage,
        exit_side: usize,
        exit_pt: (Q, Q),
        to: &RectPage,
        entry_side: usize,
        entry_pt: (Q, Q),
    ) -> Path {
        self.entries.push(json!({"hop": [
            [from.id, exit_side, pt(exit_pt)],
            [to.id, entry_side, pt(entry_pt)],
        ]}));
        self
    }

    /// Hop through the seam gluing bottom side at `x_exit` (downward) to the
    /// top side at `x_entry` of `to`.
    pub fn hop_down(self, from: &RectPage, x_exit: Q, to: &RectPage, x_entry: Q) -> Path {
        let e = from.bottom_point(x_exit);
        let n = to.top_point(x_entry);
        let es = from.bottom_side(x_exit);
        let ns = to.top_side(x_entry);
        self.hop(from, es, e, to, ns, n)
    }

    /// Hop through the seam gluing top side at `x_exit` (upward) to the
    /// bottom side at `x_entry` of `to`.
    pub fn hop_up(self, from: &RectPage, x_exit: Q, to: &RectPage, x_entry: Q) -> Path {
        let e = from.top_point(x_exit);
        let n = to.bottom_point(x_entry);
        let es = from.top_side(x_exit);
        let ns = to.bottom_side(x_entry);
        self.hop(from, es, e, to, ns, n)
    }

    /// Hop through the right edge of `from` onto the left edge of `to` at
    /// height `y` (the vertical gluings preserve the y coordinate).
    pub fn hop_right(self, from: &RectPage, to: &RectPage, y: Q) -> Path {
        let e = from.right_point(y);
        let n = to.left_point(y);
        let (es, ns) = (from.right_side(), to.left_side());
        self.hop(from, es, e, to, ns, n)
    }

    /// Hop through the left edge of `from` onto the right edge of `to`.
    pub fn hop_left(self, from: &RectPage, to: &RectPage, y: Q) -> Path {
        let e = from.left_point(y);
        let n = to.right_point(y);
        let (es, ns) = (from.left_side(), to.right_side());
        self.hop(from, es, e, to, ns, n)
    }

    pub fn closed(self, name: &str) -> Value {
        json!({"name": name, "closed": true, "path": self.entries})
    }

    pub fn arc(self, name: &str) -> Value {
        json!({"name": name, "closed": false, "path": self.entries})
    }
}

pub fn bundle(polygons: Vec<Value>, layouts: Vec<Value>, idents: Vec<Value>, curves: Vec<Value>) -> Value {
    json!({
        "surface": {"polygons": polygons, "identifications": idents},
        "layouts": layouts,
        "curves": curves,
    })
}

/// The n-holed torus carrying the vertical Morse configurations: the square
/// `[0,n] x [0,1]` with its vertical edges glued and its horizontal edges
/// glued along the bands `[i-3/4, i-1/4]` for `i = 1..n`.  The n slits
/// between consecutive bands become the boundary components; the last one
/// straddles the vertical seam.  The curve `a_i` is the vertical through the
/// i-th band, `b` the horizontal `y = 1/2`, and `delta1..n` encircle the
/// slits in order (`delta_i` between `a_i` and `a_{i+1}`).
pub fn slit_torus_page(id: &str, n: usize) -> RectPage {
    let mut xs = vec![q(0, 1)];
    for i in 1..=n as i64 {
        xs.push(q(4 * i - 3, 4));
        xs.push(q(4 * i - 1, 4));
    }
    xs.push(q(n as i64, 1));
    RectPage::new(id, xs, q(0, 1), q(1, 1))
}

/// Identifications internal to one slit-torus block: the bands around
/// `a_1 .. a_{n-1}` plus the left-right seam.  The band around `a_n` (the
/// interval reserved for chaining blocks) is *not* included; closed-up pages
/// append it, chained pages rewire it to the next block.
pub fn slit_torus_internal_idents(p: &RectPage, n: usize) -> Vec<Value> {
    let mut idents = Vec::new();
    for i in 1..n as i64 {
        let x = q(2 * i - 1, 2);
        idents.push(reversed(
            side_ref(&p.id, p.bottom_side(x)),
            side_ref(&p.id, p.top_side(x)),
        ));
    }
    idents.push(reversed(
        side_ref(&p.id, p.right_side()),
        side_ref(&p.id, p.left_side()),
    ));
    idents
}

/// The gluing of the band around `a_n`, closing up a single block into the
/// n-holed torus.
pub fn slit_torus_seam(p: &RectPage, n: usize) -> Value {
    let x = q(2 * n as i64 - 1, 2);
    reversed(
        side_ref(&p.id, p.bottom_side(x)),
        side_ref(&p.id, p.top_side(x)),
    )
}

/// Complete chart bundle for the closed-up n-holed torus with its named
/// curve system.
pub fn slit_torus_bundle(n: usize) -> Value {
    let p = slit_torus_page("blk0", n);
    let mut idents = slit_torus_internal_idents(&p, n);
    idents.push(slit_torus_seam(&p, n));
    let mut curves = Vec::new();
    for i in 1..=n as i64 {
        curves.push(vertical_curve(&p, &format!("a{i}"), q(2 * i - 1, 2)));
    }
    curves.push(horizontal_curve(&p, "b", q(1, 2)));
    for i in 1..n as i64 {
        curves.push(slit_collar(
            &p,
            &format!("delta{i}"),
            q(4 * i - 1, 4),
            q(4 * i + 1, 4),
        ));
    }
    curves.push(straddle_collar(&p, &format!("delta{n}")));
    bundle(vec![p.polygon_decl()], vec![p.layout()], idents, curves)
}

/// The three-holed torus carrying the star-relation configuration.
pub fn vhm3_bundle() -> Value {
    slit_torus_bundle(3)
}

/// Whether the upward staircase drawing realizes the image of the
/// horizontal under the *positive* composite twist along the verticals.
/// Pinned by the one-block anchor: the chained page at parameter 1 is the
/// three-holed torus itself, where the staircases must be isotopic to the
/// computed twist images of `b`.
const STAIR_FLIP: bool = false;

/// Waypoint heights of the staircase curves.
const STAIR_LANE: (i64, i64) = (66, P);
const STAIR_ELBOW: (i64, i64) = (68, P);

/// One block's stretch of a staircase curve: the post-seam elbow, the
/// crossing of the block's third vertical, the lane through the left-right
/// seam, and the two internal band climbs, ending at the next seam-climb
/// corner.  `up` selects the upward staircase; the downward one is its
/// vertical mirror.
fn staircase_block(mut path: Path, p: &RectPage, up: bool) -> Path {
    let e1 = q(1, 8);
    let e2 = q(1, 16);
    let y = |v: Q| if up { v } else { q(1, 1) - v };
    let lane = y(q(STAIR_LANE.0, STAIR_LANE.1));
    let elbow = y(q(STAIR_ELBOW.0, STAIR_ELBOW.1));
    let a3 = q(5, 2);
    path = path
        .inside(p, a3 - e2, elbow)
        .inside(p, a3 + e2, lane)
        .hop_right(p, p, lane);
    for a in [q(1, 2), q(3, 2)] {
        path = path.inside(p, a - e1, lane);
        path = if up {
            path.hop_up(p, a - e1, p, a - e1)
        } else {
            path.hop_down(p, a - e1, p, a - e1)
        };
        path = path.inside(p, a - e2, elbow).inside(p, a + e2, lane);
    }
    path.inside(p, a3 - e1, lane)
}

/// The chained page: g three-holed-torus blocks with the third band of each
/// glued to the next block, carrying the staircase curves `u0` (descending
/// through the blocks), `u2` (ascending), the horizontals `u1_1 .. u1_g`,
/// and one slit collar per block.
pub fn gplus2_bundle(g: usize) -> Value {
    let pages: Vec<RectPage> = (0..g)
        .map(|j| slit_torus_page(&format!("blk{j}"), 3))
        .collect();
    let mut idents = Vec::new();
    for p in &pages {
        idents.extend(slit_torus_internal_idents(p, 3));
    }
    let x3 = q(5, 2);
    for j in 0..g {
        // top of block j glues to the bottom of block j+1 (pair listed
        // bottom-first to match the closed-up single block exactly).
        idents.push(reversed(
            side_ref(&pages[(j + 1) % g].id, pages[(j + 1) % g].bottom_side(x3)),
            side_ref(&pages[j].id, pages[j].top_side(x3)),
        ));
    }

    let e1 = q(1, 8);
    let seam_x = x3 - e1;
    // Ascending staircase: enters block b from below, leaves through the
    // top of its third band into block b+1.
    let build_stair = |up: bool| -> Value {
        let mut path = Path::new();
        let mut b = 0usize;
        for _ in 0..g {
            let p = &pages[b];
            path = staircase_block(path, p, up);
            let next = if up { (b + 1) % g } else { (b + g - 1) % g };
            let pn = &pages[next];
            path = if up {
                path.hop_up(p, seam_x, pn, seam_x)
            } else {
                path.hop_down(p, seam_x, pn, seam_x)
            };
            b = next;
        }
        debug_assert!(b == 0);
        let name = if up != STAIR_FLIP { "u2" } else { "u0" };
        path.closed(name)
    };

    let mut curves = vec![build_stair(true), build_stair(false)];
    for (j, p) in pages.iter().enumerate() {
        curves.push(horizontal_curve(p, &format!("u1_{}", j + 1), q(1, 2)));
        curves.push(slit_collar(p, &format!("delta{}", j + 1), q(3, 4), q(5, 4)));
    }
    bundle(
        pages.iter().map(|p| p.polygon_decl()).collect(),
        pages.iter().map(|p| p.layout()).collect(),
        idents,
        curves,
    )
}

/// The four-holed torus carrying the chain-type relation configuration.
pub fn vhm4_bundle() -> Value {
    slit_torus_bundle(4)
}

/// Interior waypoints carry denominator 127 in one coordinate.  Corner
/// coordinates of every generated layout have 127-free numerators and
/// denominators, so a line through the fan apex and another corner can never
/// pass through such a waypoint; this keeps waypoints off the fan diagonals
/// the chart validator rejects.
const P: i64 = 127;

/// The two coherent resolutions of the surgery crossings on the rectangle
/// pages differ by a vertical mirror.  The transcription shipped is the one
/// that satisfies the lantern relation on the one-handle page; flipping this
/// constant draws the other resolution.
const SURGERY_MIRROR: bool = true;

/// Marked verticals of a rectangle page in x order, with the index of each
/// site's gluing partner.
pub struct SurgerySites {
    pub sites: Vec<Q>,
    pub partner: Vec<usize>,
}

/// Sites of the genus-g rectangle `[0, 2g] x [-1, 1]`: per handle, two pairs
/// of verticals at `2(i-1) + {1/3, 2/3, 4/3, 5/3}`, partnered first-with-third
/// and second-with-fourth.
pub fn ope_sites(g: usize) -> SurgerySites {
    let mut sites = Vec::new();
    let mut partner = Vec::new();
    for i in 0..g as i64 {
        for off in [q(1, 3), q(2, 3), q(4, 3), q(5, 3)] {
            sites.push(q(2 * i, 1) + off);
        }
        let base = 4 * i as usize;
        partner.extend([base + 2, base + 3, base, base + 1]);
    }
    SurgerySites { sites, partner }
}

/// Sites of the k-handle rectangle `[0, k] x [-1, 1]`: one adjacent pair of
/// verticals per handle at `(i-1) + {1/3, 2/3}`.
pub fn ope2_sites(k: usize) -> SurgerySites {
    let mut sites = Vec::new();
    let mut partner = Vec::new();
    for i in 0..k as i64 {
        sites.push(q(i, 1) + q(1, 3));
        sites.push(q(i, 1) + q(2, 3));
        let base = 2 * i as usize;
        partner.extend([base + 1, base]);
    }
    SurgerySites { sites, partner }
}

/// Rectangle page subdivided at the endpoints of the glued intervals
/// `[site - 1/12, site + 1/12]`.
fn surgery_page(id: &str, width: Q, sites: &[Q]) -> RectPage {
    let mut xs = vec![q(0, 1)];
    for &v in sites {
        xs.push(v - q(1, 12));
        xs.push(v + q(1, 12));
    }
    xs.push(width);
    RectPage::new(id, xs, q(-1, 1), q(1, 1))
}

/// Flip a height across y = 0 when the mirrored resolution is selected.
fn sy(y: Q) -> Q {
    if SURGERY_MIRROR {
        -y
    } else {
        y
    }
}

impl Path {
    /// Vertical-seam hop whose direction flips with the mirror: upward (top
    /// to bottom) in the unmirrored drawing.
    fn hop_vert(self, p: &RectPage, x_exit: Q, x_entry: Q) -> Path {
        if SURGERY_MIRROR {
            self.hop_down(p, x_exit, p, x_entry)
        } else {
            self.hop_up(p, x_exit, p, x_entry)
        }
    }

    /// Same-side hop through the outer (top unmirrored) pair of intervals of
    /// an adjacent-pair gluing; the gluing is x-reversing.
    fn hop_outer(self, p: &RectPage, x_exit: Q, x_entry: Q) -> Path {
        if SURGERY_MIRROR {
            let (e, n) = (p.bottom_point(x_exit), p.bottom_point(x_entry));
            let (es, ns) = (p.bottom_side(x_exit), p.bottom_side(x_entry));
            self.hop(p, es, e, p, ns, n)
        } else {
            let (e, n) = (p.top_point(x_exit), p.top_point(x_entry));
            let (es, ns) = (p.top_side(x_exit), p.top_side(x_entry));
            self.hop(p, es, e, p, ns, n)
        }
    }

    /// Same-side hop through the inner (bottom unmirrored) pair.
    fn hop_inner(self, p: &RectPage, x_exit: Q, x_entry: Q) -> Path {
        if SURGERY_MIRROR {
            let (e, n) = (p.top_point(x_exit), p.top_point(x_entry));
            let (es, ns) = (p.top_side(x_exit), p.top_side(x_entry));
            self.hop(p, es, e, p, ns, n)
        } else {
            let (e, n) = (p.bottom_point(x_exit), p.bottom_point(x_entry));
            let (es, ns) = (p.bottom_side(x_exit), p.bottom_side(x_entry));
            self.hop(p, es, e, p, ns, n)
        }
    }
}

/// The horizontal circle `y = 0` through the left-right seam.
fn surgery_v0(p: &RectPage) -> Value {
    let x = p.width() * q(60, P);
    Path::new()
        .inside(p, x, q(0, 1))
        .hop_right(p, p, q(0, 1))
        .closed("v0")
}

/// One cross-glued vertical pair: `{v} x [-1,1] + {w} x [-1,1]` closed up
/// through the top-of-v/bottom-of-w gluings.
fn surgery_v1_cross(p: &RectPage, name: &str, v: Q, w: Q) -> Value {
    Path::new()
        .inside(p, v, q(60, P))
        .hop_up(p, v, p, w)
        .inside(p, w, q(60, P))
        .hop_up(p, w, p, v)
        .closed(name)
}

/// One same-side-glued vertical pair.
fn surgery_v1_same(p: &RectPage, name: &str, a: Q, c: Q) -> Value {
    let (te, tn) = (p.top_point(a), p.top_point(c));
    let (be, bn) = (p.bottom_point(c), p.bottom_point(a));
    Path::new()
        .inside(p, a, q(60, P))
        .hop(p, p.top_side(a), te, p, p.top_side(c), tn)
        .inside(p, c, q(60, P))
        .hop(p, p.bottom_side(c), be, p, p.bottom_side(a), bn)
        .closed(name)
}

/// The resolved surgery curve on a cross-glued page.  At every crossing of
/// the horizontal with a marked vertical the same resolution is drawn: the
/// strand arriving from the west climbs, the strand re-entering from below
/// veers east.  The trace climbs site `j`, re-enters at its partner `w`,
/// kinks east across `w`, and proceeds to the next site; it closes up after
/// visiting every site exactly once.
fn surgery_v2_cross(p: &RectPage, s: &SurgerySites) -> Value {
    let eps = q(1, 18);
    let (lam, mu, ymid) = (sy(q(-16, P)), sy(q(-30, P)), sy(q(-23, P)));
    let n = s.sites.len();
    let mut path = Path::new();
    let mut j = 0usize;
    let mut climbs = 0usize;
    loop {
        let v = s.sites[j];
        let wi = s.partner[j];
        let w = s.sites[wi];
        path = path
            .inside(p, v - eps, lam)
            .hop_vert(p, v - eps, w - eps)
            .inside(p, w - eps, mu);
        climbs += 1;
        if wi == n - 1 {
            path = path.hop_right(p, p, ymid);
        }
        j = (wi + 1) % n;
        if j == 0 {
            break;
        }
    }
    debug_assert!(climbs == n, "surgery trace must visit every site once");
    path.closed("v2")
}

/// The resolved surgery curve on a same-side-glued page.  Per adjacent pair
/// `(a, c)` the trace climbs west of `a`, re-enters east of `c` descending,
/// swoops west across `c`, descends east of `a`, re-enters west of `c`
/// ascending, and kinks east across `c` toward the next pair.
fn surgery_v2_same(p: &RectPage, s: &SurgerySites) -> Value {
    let eps = q(1, 18);
    let (lam, mu, del, ymid) = (
        sy(q(-16, P)),
        sy(q(-30, P)),
        sy(q(14, P)),
        sy(q(-23, P)),
    );
    let k = s.sites.len() / 2;
    let mut path = Path::new();
    for m in 0..k {
        let a = s.sites[2 * m];
        let c = s.sites[2 * m + 1];
        path = path
            .inside(p, a - eps, lam)
            .hop_outer(p, a - eps, c + eps)
            .inside(p, c + eps, del)
            .inside(p, a + eps, del)
            .hop_inner(p, a + eps, c - eps)
            .inside(p, c - eps, mu);
        if m == k - 1 {
            path = path.hop_right(p, p, ymid);
        }
    }
    path.closed("v2")
}

/// Chart bundle for the genus-g rectangle page with its surgery triple
/// `v0`, `v1_1 .. v1_2g`, `v2`.
pub fn ope_bundle(g: usize) -> Value {
    let s = ope_sites(g);
    let p = surgery_page("rg", q(2 * g as i64, 1), &s.sites);
    let mut idents = Vec::new();
    for i in 0..s.sites.len() {
        let j = s.partner[i];
        if i < j {
            let (v, w) = (s.sites[i], s.sites[j]);
            idents.push(reversed(
                side_ref(&p.id, p.top_side(v)),
                side_ref(&p.id, p.bottom_side(w)),
            ));
            idents.push(reversed(
                side_ref(&p.id, p.bottom_side(v)),
                side_ref(&p.id, p.top_side(w)),
            ));
        }
    }
    idents.push(reversed(
        side_ref(&p.id, p.right_side()),
        side_ref(&p.id, p.left_side()),
    ));
    let mut curves = vec![surgery_v0(&p)];
    for j in 1..=2 * g {
        let bi = (j - 1) / 2;
        let (si, sj) = if j % 2 == 1 {
            (4 * bi, 4 * bi + 2)
        } else {
            (4 * bi + 1, 4 * bi + 3)
        };
        curves.push(surgery_v1_cross(
            &p,
            &format!("v1_{j}"),
            s.sites[si],
            s.sites[sj],
        ));
    }
    curves.push(surgery_v2_cross(&p, &s));
    bundle(vec![p.polygon_decl()], vec![p.layout()], idents, curves)
}

/// Chart bundle for the k-handle rectangle page with its surgery triple
/// `v0`, `v1_1 .. v1_k`, `v2`.
pub fn ope2_bundle(k: usize) -> Value {
    let s = ope2_sites(k);
    let p = surgery_page("rk", q(k as i64, 1), &s.sites);
    let mut idents = Vec::new();
    for m in 0..k {
        let (a, c) = (s.sites[2 * m], s.sites[2 * m + 1]);
        idents.push(reversed(
            side_ref(&p.id, p.top_side(a)),
            side_ref(&p.id, p.top_side(c)),
        ));
        idents.push(reversed(
            side_ref(&p.id, p.bottom_side(a)),
            side_ref(&p.id, p.bottom_side(c)),
        ));
    }
    idents.push(reversed(
        side_ref(&p.id, p.right_side()),
        side_ref(&p.id, p.left_side()),
    ));
    let mut curves = vec![surgery_v0(&p)];
    for m in 0..k {
        curves.push(surgery_v1_same(
            &p,
            &format!("v1_{}", m + 1),
            s.sites[2 * m],
            s.sites[2 * m + 1],
        ));
    }
    curves.push(surgery_v2_same(&p, &s));
    bundle(vec![p.polygon_decl()], vec![p.layout()], idents, curves)
}

/// A vertical circle `x = const` through the top-bottom seam.
pub fn vertical_curve(p: &RectPage, name: &str, x: Q) -> Value {
    Path::new()
        .inside(p, x, q(60, P))
        .hop_up(p, x, p, x)
        .closed(name)
}

/// A horizontal circle `y = const` through the left-right seam.
pub fn horizontal_curve(p: &RectPage, name: &str, y: Q) -> Value {
    Path::new()
        .inside(p, q(190, P), y)
        .hop_right(p, p, y)
        .closed(name)
}

/// Boundary-parallel circle around the slit `(lo, hi)` of one block: a thin
/// rectangle around the slit, crossing the seam just left and just right of
/// it.
fn slit_collar(p: &RectPage, name: &str, lo: Q, hi: Q) -> Value {
    let (d, e) = (q(16, P), q(111, P));
    let (l, r) = (lo - q(1, 8), hi + q(1, 8));
    Path::new()
        .inside(p, l, d)
        .inside(p, r, d)
        .hop_down(p, r, p, r)
        .inside(p, r, e)
        .inside(p, l, e)
        .hop_up(p, l, p, l)
        .closed(name)
}

/// Boundary-parallel circle around the slit that straddles the vertical
/// seam (`(n-1/4, n] + [0, 1/4)`).
fn straddle_collar(p: &RectPage, name: &str) -> Value {
    let (d, e) = (q(16, P), q(111, P));
    let (l, r) = (p.width() - q(3, 8), q(3, 8));
    Path::new()
        .inside(p, l, d)
        .hop_right(p, p, d)
        .inside(p, r, d)
        .hop_down(p, r, p, r)
        .inside(p, r, e)
        .hop_left(p, p, e)
        .inside(p, l, e)
        .hop_up(p, l, p, l)
        .closed(name)
}
