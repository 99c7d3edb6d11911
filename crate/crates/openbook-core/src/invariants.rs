//! Integer linear algebra: Smith normal form, finitely generated abelian
//! groups, and first homology of pages.
//!
//! All computations are exact over arbitrary-precision integers.  The
//! Smith normal form routine tracks both transformation matrices and
//! their inverses, which the homology code uses to compute kernel bases
//! and to express vectors in kernel coordinates without a separate
//! linear solver.
//!
//! For a page (connected, boundary nonempty, all vertices on the
//! boundary) the first homology is free.  [`h1_data`] produces a basis
//! of representative cycles `Z` (columns, in edge coordinates) together
//! with a dual basis of cocycles `Phi` satisfying `Phi^T Z = I` and
//! `Phi^T d2 = 0`.  A simplicial 1-cycle `gamma` (for instance a curve
//! pushed onto the 1-skeleton) then has homology class `Phi^T gamma`:
//! the cocycles kill boundaries, so the answer is exact for every
//! class, including boundary-parallel ones, which the (degenerate)
//! intersection pairing alone could not see.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::surface::Triangulation;

/// Dense integer matrix, row-major: `m[i][j]` is row `i`, column `j`.
pub type Mat = Vec<Vec<BigInt>>;

pub fn mat_zero(rows: usize, cols: usize) -> Mat {
    vec![vec![BigInt::zero(); cols]; rows]
}

pub fn mat_identity(n: usize) -> Mat {
    let mut m = mat_zero(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let rows = a.len();
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    if rows > 0 {
        debug_assert_eq!(a[0].len(), b.len());
    }
    let mut out = mat_zero(rows, cols);
    for i in 0..rows {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !bk[j].is_zero() {
                    let prod = &a[i][k] * &bk[j];
                    out[i][j] += prod;
                }
            }
        }
    }
    out
}

pub fn mat_transpose(a: &Mat) -> Mat {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut out = mat_zero(cols, rows);
    for i in 0..rows {
        for j in 0..cols {
            out[j][i] = a[i][j].clone();
        }
    }
    out
}

pub fn mat_vec(a: &Mat, x: &[BigInt]) -> Vec<BigInt> {
    a.iter()
        .map(|row| {
            let mut acc = BigInt::zero();
            for (c, xi) in row.iter().zip(x) {
                if !c.is_zero() && !xi.is_zero() {
                    acc += c * xi;
                }
            }
            acc
        })
        .collect()
}

/// Determinant by fraction-free Bareiss elimination.  Used by the Smith
/// normal form self-checks to confirm the transforms are unimodular.
pub fn determinant(m: &Mat) -> BigInt {
    let n = m.len();
    debug_assert!(m.iter().all(|r| r.len() == n));
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                let (q, r) = num_integer::Integer::div_rem(&num, &prev);
                debug_assert!(r.is_zero(), "Bareiss division is exact");
                a[i][j] = q;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Smith normal form with transforms: `d = u * m * v`, with `u`, `v`
/// unimodular and `d` diagonal, each diagonal entry nonnegative and
/// dividing the next.  `u_inv` and `v_inv` are the exact inverses.
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: Mat,
    pub u: Mat,
    pub v: Mat,
    pub u_inv: Mat,
    pub v_inv: Mat,
}

impl Snf {
    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        let n = self.d.len().min(if self.d.is_empty() { 0 } else { self.d[0].len() });
        (0..n).filter(|&i| !self.d[i][i].is_zero()).count()
    }

    /// Nonzero diagonal entries in order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let n = self.d.len().min(if self.d.is_empty() { 0 } else { self.d[0].len() });
        (0..n)
            .filter(|&i| !self.d[i][i].is_zero())
            .map(|i| self.d[i][i].clone())
            .collect()
    }
}

fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    // Round a/b to a nearest integer so remainders shrink quickly.
    let (mut q, r) = num_integer::Integer::div_rem(a, b);
    let two_r: BigInt = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.sign() == b.sign()) || r.is_zero() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// Compute the Smith normal form of `m` (any shape, including empty).
pub fn smith_normal_form(m: &Mat) -> Snf {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut a = m.to_vec();
    let mut u = mat_identity(rows);
    let mut u_inv = mat_identity(rows);
    let mut v = mat_identity(cols);
    let mut v_inv = mat_identity(cols);

    // Elementary operations, mirrored into the transforms so that
    // u * m * v stays equal to the working matrix at all times.
    macro_rules! swap_rows {
        ($i:expr, $j:expr) => {{
            let (i, j) = ($i, $j);
            if i != j {
                a.swap(i, j);
                u.swap(i, j);
                for row in u_inv.iter_mut() {
                    row.swap(i, j);
                }
            }
        }};
    }
    macro_rules! swap_cols {
        ($i:expr, $j:expr) => {{
            let (i, j) = ($i, $j);
            if i != j {
                for row in a.iter_mut() {
                    row.swap(i, j);
                }
                for row in v.iter_mut() {
                    row.swap(i, j);
                }
                v_inv.swap(i, j);
            }
        }};
    }
    // row i += q * row t
    macro_rules! add_row {
        ($i:expr, $t:expr, $q:expr) => {{
            let (i, t, q) = ($i, $t, $q);
            if !q.is_zero() {
                for j in 0..cols {
                    let delta = &q * &a[t][j];
                    a[i][j] += delta;
                }
                for j in 0..rows {
                    let delta = &q * &u[t][j];
                    u[i][j] += delta;
                }
                for r in 0..rows {
                    let delta = &q * &u_inv[r][i];
                    u_inv[r][t] -= delta;
                }
            }
        }};
    }
    // col j += q * col t
    macro_rules! add_col {
        ($j:expr, $t:expr, $q:expr) => {{
            let (j, t, q) = ($j, $t, $q);
            if !q.is_zero() {
                for i in 0..rows {
                    let delta = &q * &a[i][t];
                    a[i][j] += delta;
                }
                for i in 0..cols {
                    let delta = &q * &v[i][t];
                    v[i][j] += delta;
                }
                for c in 0..cols {
                    let delta = &q * &v_inv[j][c];
                    v_inv[t][c] -= delta;
                }
            }
        }};
    }

    let bound = rows.min(cols);
    let mut t = 0;
    while t < bound {
        // Pick the nonzero entry of least absolute value in the working
        // submatrix as pivot; small pivots keep coefficient growth down.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j].is_zero() {
                    continue;
                }
                match pivot {
                    None => pivot = Some((i, j)),
                    Some((pi, pj)) => {
                        if a[i][j].abs() < a[pi][pj].abs() {
                            pivot = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break;
        };
        swap_rows!(t, pi);
        swap_cols!(t, pj);

        // Clear row and column t; repeat while reductions leave remainders
        // (each round strictly shrinks |pivot|).
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = -nearest_quotient(&a[i][t], &a[t][t]);
                add_row!(i, t, q);
                if !a[i][t].is_zero() {
                    swap_rows!(t, i);
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = -nearest_quotient(&a[t][j], &a[t][t]);
                add_col!(j, t, q);
                if !a[t][j].is_zero() {
                    swap_cols!(t, j);
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }

        // Divisibility: the pivot must divide every remaining entry.  If
        // not, fold the offending row in and redo this position.
        let mut offender = None;
        'search: for i in t + 1..rows {
            for j in t + 1..cols {
                if !num_integer::Integer::div_rem(&a[i][j], &a[t][t]).1.is_zero() {
                    offender = Some(i);
                    break 'search;
                }
            }
        }
        if let Some(i) = offender {
            add_row!(t, i, BigInt::one());
            continue;
        }
        t += 1;
    }
    // Make the diagonal nonnegative.
    for i in 0..bound {
        if a[i][i].sign() == num_bigint::Sign::Minus {
            for j in 0..cols {
                a[i][j] = -a[i][j].clone();
            }
            for j in 0..rows {
                u[i][j] = -u[i][j].clone();
            }
            for (r, row) in u_inv.iter_mut().enumerate() {
                let _ = r;
                row[i] = -row[i].clone();
            }
        }
    }

    let snf = Snf {
        d: a,
        u,
        v,
        u_inv,
        v_inv,
    };
    debug_assert!(snf_self_check(m, &snf), "Smith normal form self-check failed");
    snf
}

/// Verify `d = u*m*v`, diagonality, the divisibility chain, that the
/// inverses invert, and that the transforms are unimodular.
pub fn snf_self_check(m: &Mat, snf: &Snf) -> bool {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let umv = mat_mul(&mat_mul(&snf.u, m), &snf.v);
    if umv != snf.d {
        return false;
    }
    for (i, row) in snf.d.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i != j && !x.is_zero() {
                return false;
            }
        }
    }
    let factors = snf.invariant_factors();
    for w in factors.windows(2) {
        if !num_integer::Integer::div_rem(&w[1], &w[0]).1.is_zero() {
            return false;
        }
    }
    // All nonzero diagonal entries must come first.
    let n = rows.min(cols);
    let mut seen_zero = false;
    for i in 0..n {
        if snf.d[i][i].is_zero() {
            seen_zero = true;
        } else if seen_zero {
            return false;
        }
    }
    if mat_mul(&snf.u, &snf.u_inv) != mat_identity(rows) {
        return false;
    }
    if mat_mul(&snf.v, &snf.v_inv) != mat_identity(cols) {
        return false;
    }
    determinant(&snf.u).abs().is_one() && determinant(&snf.v).abs().is_one()
}

/// A basis (as matrix columns) of the integer kernel of `m`.
pub fn kernel_basis(m: &Mat) -> Mat {
    let snf = smith_normal_form(m);
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let r = snf.rank();
    let mut basis = mat_zero(cols, cols - r);
    for (i, row) in snf.v.iter().enumerate() {
        for j in r..cols {
            basis[i][j - r] = row[j].clone();
        }
    }
    basis
}

/// A finitely generated abelian group in invariant-factor form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroup {
    pub free_rank: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// JSON form: torsion entries become numbers when they fit in 64
    /// bits, decimal strings otherwise.
    pub fn to_json(&self) -> serde_json::Value {
        use num_traits::ToPrimitive;
        let torsion: Vec<serde_json::Value> = self
            .torsion
            .iter()
            .map(|t| match t.to_i64() {
                Some(x) => serde_json::json!(x),
                None => serde_json::json!(t.to_string()),
            })
            .collect();
        serde_json::json!({
            "free_rank": self.free_rank,
            "torsion": torsion,
        })
    }

    /// The quotient of `Z^n` by the column span of `relations` (an
    /// `n x k` matrix).
    pub fn from_presentation(n: usize, relations: &Mat) -> Self {
        debug_assert!(relations.is_empty() || relations.len() == n);
        if n == 0 {
            return AbelianGroup::free(0);
        }
        let k = if relations.is_empty() {
            0
        } else {
            relations[0].len()
        };
        if k == 0 {
            return AbelianGroup::free(n);
        }
        let snf = smith_normal_form(relations);
        let factors = snf.invariant_factors();
        let torsion: Vec<BigInt> = factors.into_iter().filter(|f| !f.is_one()).collect();
        let rank_rel = snf.rank();
        AbelianGroup {
            free_rank: n - rank_rel,
            torsion,
        }
    }
}

impl std::fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" \u{2295} "))
    }
}

/// Cached homology data of a page: a cycle basis and its dual cocycles.
#[derive(Debug, Clone)]
pub struct H1Data {
    /// Rank of the first homology.
    pub rank: usize,
    /// `E x rank`; column `j` is the representative cycle `z_j` written in
    /// edge coordinates.
    pub cycles: Mat,
    /// `E x rank`; columns are cocycles with `duals^T * cycles = I`.
    pub duals: Mat,
}

/// Boundary map from triangles to edges (`E x T`).
pub fn boundary_2(t: &Triangulation) -> Mat {
    let mut m = mat_zero(t.edges.len(), t.triangles.len());
    for (ti, tri) in t.triangles.iter().enumerate() {
        for side in &tri.sides {
            if side.forward {
                m[side.edge][ti] += 1;
            } else {
                m[side.edge][ti] -= 1;
            }
        }
    }
    m
}

/// Boundary map from edges to vertices (`V x E`).
pub fn boundary_1(t: &Triangulation) -> Mat {
    let mut m = mat_zero(t.vertices.len(), t.edges.len());
    for (ei, e) in t.edges.iter().enumerate() {
        m[e.to][ei] += 1;
        m[e.from][ei] -= 1;
    }
    m
}

/// Compute (or fetch the cached) homology data of a page.
pub fn h1_data(t: &Triangulation) -> &H1Data {
    t.h1_cache.get_or_init(|| compute_h1(t))
}

fn compute_h1(t: &Triangulation) -> H1Data {
    let d2 = boundary_2(t);
    let d1 = boundary_1(t);
    let n_edges = t.edges.len();
    let n_tris = t.triangles.len();

    // Kernel of d1, with coordinates available through v_inv.
    let snf1 = smith_normal_form(&d1);
    let r1 = snf1.rank();
    let hdim = n_edges - r1;
    // K columns are v[:, r1..]; a vector x in the kernel has coordinates
    // (v_inv * x)[r1..].
    let mut k = mat_zero(n_edges, hdim);
    for (i, row) in snf1.v.iter().enumerate() {
        for j in 0..hdim {
            k[i][j] = row[r1 + j].clone();
        }
    }

    // Q: columns of d2 in kernel coordinates.
    let mut q = mat_zero(hdim, n_tris);
    for col in 0..n_tris {
        let x: Vec<BigInt> = (0..n_edges).map(|i| d2[i][col].clone()).collect();
        let y = mat_vec(&snf1.v_inv, &x);
        for (i, yi) in y.iter().enumerate().take(r1) {
            debug_assert!(yi.is_zero(), "boundary is not a cycle at coordinate {i}");
        }
        for i in 0..hdim {
            q[i][col] = y[r1 + i].clone();
        }
    }

    // H1 = Z^hdim / im(Q); for a page with boundary this must be free, so
    // every invariant factor of Q is 1.
    let snfq = smith_normal_form(&q);
    let s = snfq.rank();
    assert!(
        snfq.invariant_factors().iter().all(|f| f.is_one()),
        "page homology has torsion; triangulation is not a surface with boundary"
    );
    let h = hdim - s;
    let mut free_coords = mat_zero(hdim, h);
    for (i, row) in snfq.u_inv.iter().enumerate() {
        for j in 0..h {
            free_coords[i][j] = row[s + j].clone();
        }
    }
    let cycles = mat_mul(&k, &free_coords);
    if h == 0 {
        return H1Data {
            rank: 0,
            cycles: mat_zero(n_edges, 0),
            duals: mat_zero(n_edges, 0),
        };
    }

    // Dual cocycles: C = ker(d2^T); pairing P = C^T * cycles has Smith
    // form [I_h; 0]; fold the transforms back to get duals with
    // duals^T * cycles = I.
    let c = kernel_basis(&mat_transpose(&d2));
    let p = mat_mul(&mat_transpose(&c), &cycles);
    let snfp = smith_normal_form(&p);
    assert_eq!(snfp.rank(), h, "cocycle evaluation pairing is degenerate");
    assert!(
        snfp.invariant_factors().iter().all(|f| f.is_one()),
        "cocycle evaluation pairing is not onto"
    );
    // W^T = v_p * [I_h | 0] * u_p, so that W^T * P = I.
    let m_c = p.len();
    let mut selector = mat_zero(h, m_c);
    for (i, row) in selector.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    let wt = mat_mul(&mat_mul(&snfp.v, &selector), &snfp.u);
    let duals = mat_mul(&c, &mat_transpose(&wt));
    debug_assert_eq!(
        mat_mul(&mat_transpose(&duals), &cycles),
        mat_identity(h),
        "dual basis does not invert the cycle basis"
    );

    // Rank sanity: h = 1 - chi for a connected surface with boundary.
    let chi = crate::surface::euler_characteristic(t);
    debug_assert_eq!(h as i64, 1 - chi, "homology rank disagrees with Euler characteristic");

    H1Data {
        rank: h,
        cycles,
        duals,
    }
}

/// First homology of the page with a basis of representative cycles
/// (columns, edge coordinates).
pub fn h1_page(t: &Triangulation) -> (AbelianGroup, Mat) {
    let data = h1_data(t);
    (AbelianGroup::free(data.rank), data.cycles.clone())
}

/// Coordinates of a simplicial 1-cycle in the page's cycle basis.  The
/// dual cocycles kill boundaries, so the answer only depends on the
/// homology class of the chain.
pub fn class_from_chain(t: &Triangulation, chain: &[BigInt]) -> Vec<BigInt> {
    let data = h1_data(t);
    mat_vec(&mat_transpose(&data.duals), chain)
}

// ---------------------------------------------------------------------
// Three- and four-manifold invariants of open books
// ---------------------------------------------------------------------

/// First homology of the closed 3-manifold determined by an open book.
///
/// The manifold is the mapping torus of the monodromy with each boundary
/// torus collapsed back to its binding circle.  Collapsing kills the
/// fiber direction at every binding component, and a Mayer-Vietoris /
/// Wang argument leaves the presentation
///
/// ```text
/// H1 = H1(page) / < [delta * phi(delta)^{-1}] : delta a proper arc >
/// ```
///
/// with one relation for each interior edge: the interior edges cut the
/// page into triangles, so their relative classes generate
/// `H1(page, boundary)` and the relation set is complete.  Each relation
/// loop is computed geometrically: the monodromy is applied to the
/// directed edge-parallel arc and the closed difference chain is read
/// off.  Interior edges with both endpoints at one vertex (which only
/// arise on stabilized pages) have no parallel arc; their relation is
/// the absolute class `(I - M)[e]` with `M` the induced H1 action.
pub fn h1_open_book(ob: &crate::factorization::OpenBook) -> crate::error::Result<AbelianGroup> {
    let t = &ob.page;
    let w = crate::factorization::total_monodromy(t, &ob.factorization)?;
    let data = h1_data(t);
    let m_w = crate::mcg::induced_h1_matrix(t, &w)?;
    let mut relations: Mat = mat_zero(data.rank, 0);
    for e in t.interior_edge_ids() {
        let edge = &t.edges[e];
        let rel = if edge.from == edge.to {
            // Loop edge: the edge itself is a cycle; relation (I - M)[e].
            let mut chain = vec![BigInt::zero(); t.edges.len()];
            chain[e] = BigInt::one();
            let v = class_from_chain(t, &chain);
            let mv = mat_vec(&m_w, &v);
            v.iter().zip(&mv).map(|(a, b)| a - b).collect::<Vec<_>>()
        } else {
            let arc = crate::curves::edge_arc_directed(t, e);
            let img = crate::mcg::apply(t, &w, &arc)?;
            let mut c2 = crate::curves::chain_vector(t, &img);
            let ends = img.endpoints.expect("monodromy image of an arc is an arc");
            if ends == [edge.to, edge.from] {
                for x in &mut c2 {
                    *x = -x.clone();
                }
            } else {
                debug_assert_eq!(ends, [edge.from, edge.to], "arc endpoints must be fixed");
            }
            let c1 = crate::curves::chain_vector(t, &arc);
            let diff: Vec<BigInt> = c1.iter().zip(&c2).map(|(a, b)| a - b).collect();
            class_from_chain(t, &diff)
        };
        for (row, x) in relations.iter_mut().zip(rel) {
            row.push(x);
        }
    }
    Ok(AbelianGroup::from_presentation(data.rank, &relations))
}

/// Invariants of the 4-manifold built from a Lefschetz fibration over the
/// disk with the given regular fiber and ordered vanishing cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LefschetzInvariants {
    pub chi: i64,
    pub h1: AbelianGroup,
    /// Rank of H2; torsion in H2 is determined by H1 and not reported.
    pub h2_rank: usize,
}

impl LefschetzInvariants {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "chi": self.chi,
            "h1": self.h1.to_json(),
            "h2_rank": self.h2_rank,
        })
    }
}

/// Euler characteristic, H1, and the rank of H2 of the Lefschetz
/// fibration over the disk with the open book's tuple as its ordered
/// vanishing cycles.  The fiber times the disk contributes `chi(page)`;
/// every 2-handle adds one.  H1 kills the vanishing cycle classes, and
/// each relation that is dependent modulo the earlier ones frees up one
/// rank of H2.
pub fn lefschetz_invariants(
    ob: &crate::factorization::OpenBook,
) -> crate::error::Result<LefschetzInvariants> {
    let t = &ob.page;
    let data = h1_data(t);
    let cycles = &ob.factorization.cycles;
    let mut classes: Mat = mat_zero(data.rank, 0);
    for c in cycles {
        let class = crate::curves::homology_class(t, c, false)?;
        for (row, x) in classes.iter_mut().zip(class) {
            row.push(x);
        }
    }
    let rank = if cycles.is_empty() || data.rank == 0 {
        0
    } else {
        smith_normal_form(&classes).rank()
    };
    Ok(LefschetzInvariants {
        chi: crate::surface::euler_characteristic(t) + cycles.len() as i64,
        h1: AbelianGroup::from_presentation(data.rank, &classes),
        h2_rank: cycles.len() - rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{
        build_surface, GluingDirection, Identification, PolygonDecl, PolygonSpec, SideRef,
    };

    fn int_mat(rows: &[&[i64]]) -> Mat {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn snf_hand_case() {
        let m = int_mat(&[&[2, 4], &[6, 8]]);
        let snf = smith_normal_form(&m);
        assert!(snf_self_check(&m, &snf));
        assert_eq!(
            snf.invariant_factors(),
            vec![BigInt::from(2), BigInt::from(4)]
        );
    }

    #[test]
    fn snf_zero_and_empty() {
        let m = int_mat(&[&[0, 0], &[0, 0]]);
        let snf = smith_normal_form(&m);
        assert!(snf_self_check(&m, &snf));
        assert_eq!(snf.rank(), 0);

        let empty: Mat = vec![];
        let snf = smith_normal_form(&empty);
        assert!(snf_self_check(&empty, &snf));
    }

    #[test]
    fn snf_divisibility_chain() {
        let m = int_mat(&[&[2, 0], &[0, 3]]);
        let snf = smith_normal_form(&m);
        assert!(snf_self_check(&m, &snf));
        assert_eq!(
            snf.invariant_factors(),
            vec![BigInt::from(1), BigInt::from(6)]
        );
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = int_mat(&[&[1, 2, 3]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 3);
        assert_eq!(k[0].len(), 2);
        // Both columns must be genuine kernel vectors.
        for j in 0..2 {
            let combo: BigInt = (0..3).map(|i| &m[0][i] * &k[i][j]).sum();
            assert!(combo.is_zero());
        }
    }

    #[test]
    fn abelian_group_display() {
        let trivial = AbelianGroup::free(0);
        assert_eq!(trivial.to_string(), "0");
        assert_eq!(AbelianGroup::free(1).to_string(), "Z");
        assert_eq!(AbelianGroup::free(3).to_string(), "Z^3");
        let g = AbelianGroup {
            free_rank: 2,
            torsion: vec![BigInt::from(2), BigInt::from(4)],
        };
        assert_eq!(g.to_string(), "Z^2 \u{2295} Z/2 \u{2295} Z/4");
    }

    #[test]
    fn presentation_quotients() {
        // Z^2 / <(2,0),(0,3)> = Z/2 + Z/3 = Z/6 in invariant factors.
        let rel = int_mat(&[&[2, 0], &[0, 3]]);
        let g = AbelianGroup::from_presentation(2, &rel);
        assert_eq!(g.free_rank, 0);
        assert_eq!(g.torsion, vec![BigInt::from(6)]);

        // Z^3 / <(0,0,2)> = Z^2 + Z/2.
        let rel = int_mat(&[&[0], &[0], &[2]]);
        let g = AbelianGroup::from_presentation(3, &rel);
        assert_eq!(g.free_rank, 2);
        assert_eq!(g.torsion, vec![BigInt::from(2)]);
    }

    fn annulus() -> crate::surface::Triangulation {
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

    #[test]
    fn annulus_h1() {
        let t = annulus();
        let (group, basis) = h1_page(&t);
        assert_eq!(group.free_rank, 1);
        assert!(group.torsion.is_empty());
        assert_eq!(basis.len(), t.edges.len());
        assert_eq!(basis[0].len(), 1);
        // The basis column is a cycle: boundary_1 * z = 0.
        let d1 = boundary_1(&t);
        let z: Vec<BigInt> = basis.iter().map(|row| row[0].clone()).collect();
        assert!(mat_vec(&d1, &z).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn disk_h1_trivial() {
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "sq".into(),
                sides: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            }],
            identifications: vec![],
        };
        let t = build_surface(&spec).unwrap();
        let (group, basis) = h1_page(&t);
        assert!(group.is_trivial());
        assert!(basis.iter().all(|row| row.is_empty()));
    }

    #[test]
    fn randomized_snf_self_checks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for _ in 0..60 {
            let rows = rng.gen_range(0..6);
            let cols = rng.gen_range(0..6);
            let m: Mat = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| BigInt::from(rng.gen_range(-9i64..=9)))
                        .collect()
                })
                .collect();
            let snf = smith_normal_form(&m);
            assert!(snf_self_check(&m, &snf), "failed for {m:?}");
        }
    }

    use crate::curves::{Curve, Port, Seg};
    use crate::factorization::{Factorization, OpenBook};

    fn annulus_core(t: &Triangulation) -> Curve {
        crate::curves::normalize(
            t,
            &Curve::closed(
                t,
                vec![
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
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn annulus_book(k: usize) -> OpenBook {
        let t = annulus();
        let core = annulus_core(&t);
        let f = Factorization::new(&t, vec![core; k]).unwrap();
        OpenBook::new(t, f).unwrap()
    }

    fn disk_book() -> OpenBook {
        let spec = PolygonSpec {
            polygons: vec![PolygonDecl {
                id: "tri".into(),
                sides: vec!["a".into(), "b".into(), "c".into()],
            }],
            identifications: vec![],
        };
        let t = build_surface(&spec).unwrap();
        let f = Factorization::new(&t, vec![]).unwrap();
        OpenBook::new(t, f).unwrap()
    }

    #[test]
    fn open_book_h1_matches_known_manifolds() {
        // Disk, identity: the 3-sphere.
        assert!(h1_open_book(&disk_book()).unwrap().is_trivial());
        // Annulus, identity: S^1 x S^2.
        let g = h1_open_book(&annulus_book(0)).unwrap();
        assert_eq!(g, AbelianGroup::free(1));
        // Annulus, one positive twist: the 3-sphere again.
        assert!(h1_open_book(&annulus_book(1)).unwrap().is_trivial());
        // Annulus, k twists: the lens space L(k, k-1).
        for k in 2..5usize {
            let g = h1_open_book(&annulus_book(k)).unwrap();
            assert_eq!(g.free_rank, 0);
            assert_eq!(g.torsion, vec![BigInt::from(k)]);
        }
    }

    #[test]
    fn open_book_h1_ignores_twist_ordering_data() {
        // The relation loops use the geometric monodromy, so conjugating
        // the factorization must not change the group.
        let ob = annulus_book(3);
        let w = crate::mcg::Word::twist(&ob.page, &ob.factorization.cycles[0], -1).unwrap();
        let g = crate::factorization::global_conjugate(&ob.page, &ob.factorization, &w).unwrap();
        let ob2 = OpenBook::new(ob.page.clone(), g).unwrap();
        assert_eq!(
            h1_open_book(&ob).unwrap(),
            h1_open_book(&ob2).unwrap()
        );
    }

    #[test]
    fn open_book_h1_survives_stabilization() {
        // Plumbing a positive Hopf band changes the page and the tuple
        // but not the 3-manifold.  The stabilized pages carry interior
        // loop edges, so this also exercises the loop-edge relations.
        for k in 0..4usize {
            let ob = annulus_book(k);
            let before = h1_open_book(&ob).unwrap();
            for e in ob.page.interior_edge_ids() {
                let arc = crate::curves::edge_parallel_arc(&ob.page, e).unwrap();
                for pos in [
                    crate::factorization::StabilizePosition::Prepend,
                    crate::factorization::StabilizePosition::Append,
                ] {
                    let st = crate::factorization::stabilize(&ob, &arc, pos).unwrap();
                    assert_eq!(h1_open_book(&st).unwrap(), before, "k = {k}");
                }
            }
        }
    }

    #[test]
    fn lefschetz_invariants_of_twist_stacks() {
        // k copies of the annulus core: chi = k, H1 = Z for k = 0 and
        // trivial afterwards, and dependent relations feed H2.
        for k in 0..4usize {
            let inv = lefschetz_invariants(&annulus_book(k)).unwrap();
            assert_eq!(inv.chi, k as i64);
            if k == 0 {
                assert_eq!(inv.h1, AbelianGroup::free(1));
                assert_eq!(inv.h2_rank, 0);
            } else {
                assert!(inv.h1.is_trivial());
                assert_eq!(inv.h2_rank, k - 1);
            }
        }
        let j = lefschetz_invariants(&annulus_book(2)).unwrap().to_json();
        assert_eq!(j["chi"], 2);
        assert_eq!(j["h2_rank"], 1);
    }
}
