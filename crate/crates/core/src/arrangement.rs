//! Output-sensitive enumeration of pairs, triples and vertices of an arrangement
//! of tetrahedra in R^4.
//!
//! Intersecting pairs come from batched range queries (edges against
//! tetrahedra, 2-faces against 2-faces). Each nonempty `T_i ∩ T_j` is a convex
//! polygon; inside the hyperplane of every `T_0` those polygons are
//! triangulated and intersected in a 3D chart to find triples and quadruples.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, exact, q, segment_tetra_direct, ExactScalar, Point4, Segment4, Tetrahedron4};
use crate::oracle::{face_meet, kind_name, Arrangement, Entity, KCounts, VertexKind};
use crate::rangetree::{batched_budget, TetraStructure, TriangleStructure};
use crate::report::QueryMode;

type V3 = [ExactScalar; 3];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub pair: (usize, usize),
    pub vertex: Point4,
    pub kind: VertexKind,
}

/// The convex polygon `T_i ∩ T_j`, vertices in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionPolygon {
    pub pair: (usize, usize),
    pub vertices: Vec<Entity>,
}

impl IntersectionPolygon {
    pub fn points(&self) -> Vec<Point4> {
        self.vertices.iter().map(|v| v.point.clone()).collect()
    }
}

/// Intersecting pairs with one polygon vertex each, found by batched range queries.
pub fn pairwise(tetrahedra: &[Tetrahedron4]) -> Result<Vec<PairWitness>> {
    let mut best: BTreeMap<(usize, usize), (VertexKind, Point4)> = BTreeMap::new();
    let mut offer = |i: usize, j: usize, kind: VertexKind, p: Point4| {
        let key = (i.min(j), i.max(j));
        let cand = (kind, p);
        match best.get(&key) {
            Some(cur) if *cur <= cand => {}
            _ => {
                best.insert(key, cand);
            }
        }
    };
    for (i, j, p) in edge_hits(tetrahedra)? {
        offer(i, j, VertexKind::EdgeTetra, p);
    }
    for (i, j, p) in face_hits(tetrahedra)? {
        offer(i, j, VertexKind::FaceFace, p);
    }
    Ok(best.into_iter().map(|(pair, (kind, vertex))| PairWitness { pair, vertex, kind }).collect())
}

/// `(edge owner, tetrahedron, point)` for every edge meeting another tetrahedron.
fn edge_hits(t: &[Tetrahedron4]) -> Result<Vec<(usize, usize, Point4)>> {
    let edges: Vec<Segment4> = t
        .iter()
        .flat_map(|x| x.edges().map(|(a, b)| Segment4::new(a.clone(), b.clone()).expect("tetrahedron edges are proper")))
        .collect();
    let rep = match batched_budget(edges.len() as u64, t.len() as u64) {
        Some(b) => TetraStructure::build(t, b, 0)?.query_batch(&edges, QueryMode::Report).0,
        None => crate::oracle::seg_tetra_query(&edges, t, QueryMode::Report),
    };
    Ok(rep.pairs.into_iter().map(|h| (h.a / 6, h.b, h.witness)).filter(|(i, j, _)| i != j).collect())
}

/// `(i, j, point)` with `i < j` for every pair of 2-faces of distinct tetrahedra that meet.
fn face_hits(t: &[Tetrahedron4]) -> Result<Vec<(usize, usize, Point4)>> {
    let faces: Vec<_> = t.iter().flat_map(|x| x.faces()).collect();
    let rep = match batched_budget(faces.len() as u64, faces.len() as u64) {
        Some(b) => TriangleStructure::build(&faces, b, 0)?.query_batch(&faces, QueryMode::Report).0,
        None => crate::oracle::tri_tri_query(&faces, &faces, QueryMode::Report),
    };
    Ok(rep.pairs.into_iter().map(|h| (h.a / 4, h.b / 4, h.witness)).filter(|(i, j, _)| i < j).collect())
}

/// All vertices of `T_i ∩ T_j` in cyclic order around the polygon.
pub fn intersection_polygon(tetrahedra: &[Tetrahedron4], i: usize, j: usize) -> Result<IntersectionPolygon> {
    let (ti, tj) = (&tetrahedra[i], &tetrahedra[j]);
    if ti.hyperplane() == tj.hyperplane() {
        return Err(Error::DegeneratePosition);
    }
    let mut verts = Vec::new();
    for (own, a, b) in [(i, ti, tj), (j, tj, ti)] {
        let other = if own == i { j } else { i };
        for (x, y) in a.edges() {
            let e = Segment4::new(x.clone(), y.clone()).expect("tetrahedron edges are proper");
            if let Some(p) = segment_tetra_direct(&e, b) {
                verts.push(Entity { tetrahedra: vec![own, other], kind: Some(VertexKind::EdgeTetra), point: p });
            }
        }
    }
    for f in ti.faces() {
        for g in tj.faces() {
            if let Some(p) = face_meet(&f, &g)? {
                verts.push(Entity { tetrahedra: vec![i.min(j), i.max(j)], kind: Some(VertexKind::FaceFace), point: p });
            }
        }
    }
    if verts.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let distinct: BTreeSet<&Point4> = verts.iter().map(|v| &v.point).collect();
    if verts.len() < 3 || distinct.len() != verts.len() {
        return Err(Error::DegeneratePosition);
    }
    let (a, b) = chart2(ti, tj)?;
    let xy: Vec<[ExactScalar; 2]> = verts.iter().map(|v| [v.point.coords()[a].clone(), v.point.coords()[b].clone()]).collect();
    let k = q(xy.len() as i64);
    let c = [xy.iter().map(|p| &p[0]).sum::<ExactScalar>() / &k, xy.iter().map(|p| &p[1]).sum::<ExactScalar>() / &k];
    let mut order: Vec<usize> = (0..verts.len()).collect();
    order.sort_by(|&u, &v| {
        let d = |p: &[ExactScalar; 2]| [&p[0] - &c[0], &p[1] - &c[1]];
        let (du, dv) = (d(&xy[u]), d(&xy[v]));
        let upper = |d: &[ExactScalar; 2]| d[1].is_positive() || (d[1].is_zero() && d[0].is_positive());
        upper(&dv).cmp(&upper(&du)).then_with(|| {
            let cross = &du[0] * &dv[1] - &du[1] * &dv[0];
            ExactScalar::zero().cmp(&cross)
        })
    });
    let m = order.len();
    for k in 0..m {
        let [p, q0, r] = [&xy[order[k]], &xy[order[(k + 1) % m]], &xy[order[(k + 2) % m]]];
        let turn = (&q0[0] - &p[0]) * (&r[1] - &p[1]) - (&q0[1] - &p[1]) * (&r[0] - &p[0]);
        if !turn.is_positive() {
            return Err(Error::DegeneratePosition);
        }
    }
    Ok(IntersectionPolygon { pair: (i.min(j), i.max(j)), vertices: order.into_iter().map(|u| verts[u].clone()).collect() })
}

/// Two coordinates on which the 2-plane `h_i ∩ h_j` projects bijectively, with
/// the largest projected determinant.
fn chart2(ti: &Tetrahedron4, tj: &Tetrahedron4) -> Result<(usize, usize)> {
    let mut m = vec![ti.hyperplane().coeffs().to_vec(), tj.hyperplane().coeffs().to_vec()];
    let piv = exact::row_echelon(&mut m);
    if piv.len() != 2 {
        return Err(Error::DegeneratePosition);
    }
    let basis: Vec<[ExactScalar; 4]> = (0..4)
        .filter(|c| !piv.contains(c))
        .map(|f| {
            let mut v: [ExactScalar; 4] = std::array::from_fn(|c| q((c == f) as i64));
            for (r, &p) in piv.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect();
    let mut best: Option<(ExactScalar, (usize, usize))> = None;
    for a in 0..4 {
        for b in a + 1..4 {
            let d = (&basis[0][a] * &basis[1][b] - &basis[0][b] * &basis[1][a]).abs();
            if best.as_ref().is_none_or(|(x, _)| d > *x) {
                best = Some((d, (a, b)));
            }
        }
    }
    Ok(best.expect("six coordinate pairs").1)
}

/// Affine chart of a hyperplane by dropping its coordinate of largest normal weight.
#[derive(Clone, Debug)]
pub struct Chart3 {
    drop: usize,
    normal: [ExactScalar; 4],
    offset: ExactScalar,
}

impl Chart3 {
    pub fn new(t: &Tetrahedron4) -> Chart3 {
        let h = t.hyperplane();
        let drop = (0..4).max_by(|&a, &b| h.coeffs()[a].abs().cmp(&h.coeffs()[b].abs()).then(b.cmp(&a))).expect("four coordinates");
        Chart3 { drop, normal: h.coeffs().clone(), offset: h.offset().clone() }
    }

    pub fn project(&self, p: &Point4) -> [ExactScalar; 3] {
        let mut it = (0..4).filter(|&c| c != self.drop).map(|c| p.coords()[c].clone());
        std::array::from_fn(|_| it.next().expect("three kept coordinates"))
    }

    pub fn lift(&self, x: &[ExactScalar; 3]) -> Point4 {
        let mut c: [ExactScalar; 4] = Default::default();
        let mut rest = self.offset.clone();
        for (k, col) in (0..4).filter(|&c| c != self.drop).enumerate() {
            rest -= &self.normal[col] * &x[k];
            c[col] = x[k].clone();
        }
        c[self.drop] = rest / &self.normal[self.drop];
        Point4::from_array(c)
    }
}

type I3 = [BigInt; 3];

fn cross3(a: &I3, b: &I3) -> I3 {
    [&a[1] * &b[2] - &a[2] * &b[1], &a[2] * &b[0] - &a[0] * &b[2], &a[0] * &b[1] - &a[1] * &b[0]]
}

fn dot3(a: &I3, b: &I3) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

/// A chart point `x / w` with `w > 0`.
#[derive(Clone, Debug)]
struct H3 {
    x: I3,
    w: BigInt,
}

impl H3 {
    fn of(p: &V3) -> H3 {
        let w = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        H3 { x: std::array::from_fn(|i| p[i].numer() * (&w / p[i].denom())), w }
    }

    fn to_rational(&self) -> V3 {
        std::array::from_fn(|i| ExactScalar::new(self.x[i].clone(), self.w.clone()))
    }

    /// `self - o` up to the positive factor `w_self w_o`.
    fn minus(&self, o: &H3) -> I3 {
        std::array::from_fn(|i| &self.x[i] * &o.w - &o.x[i] * &self.w)
    }

    /// Sign-carrying value of `n · p - off`, up to the positive factor `w`.
    fn side(&self, n: &I3, off: &BigInt) -> BigInt {
        dot3(n, &self.x) - off * &self.w
    }
}

/// Position of a chart point along a direction, compared as `num / w`.
#[derive(Clone, Debug)]
struct Along {
    num: BigInt,
    p: H3,
}

impl Along {
    fn new(p: H3, dir: &I3) -> Along {
        Along { num: dot3(dir, &p.x), p }
    }

    fn cmp(&self, o: &Along) -> std::cmp::Ordering {
        (&self.num * &o.p.w).cmp(&(&o.num * &self.p.w))
    }
}

/// A convex polygon in the chart with a primitive integer equation of its plane.
#[derive(Clone, Debug)]
struct Poly3 {
    pts: Vec<H3>,
    normal: I3,
    offset: BigInt,
}

impl Poly3 {
    fn new(chart: &Chart3, poly: &[Point4]) -> Result<Poly3> {
        let pts: Vec<H3> = poly.iter().map(|x| H3::of(&chart.project(x))).collect();
        let n = cross3(&pts[1].minus(&pts[0]), &pts[2].minus(&pts[0]));
        if n.iter().all(Zero::is_zero) {
            return Err(Error::DegeneratePosition);
        }
        // n · x / w = n · x0 / w0 on the plane; scale to coprime integers.
        let mut normal = n.clone().map(|c| c * &pts[0].w);
        let mut offset = dot3(&n, &pts[0].x);
        let g = normal.iter().fold(offset.clone(), |acc, c| acc.gcd(c));
        for c in &mut normal {
            *c /= &g;
        }
        offset /= &g;
        Ok(Poly3 { pts, normal, offset })
    }

    fn tris(&self) -> Vec<[&H3; 3]> {
        fan(&self.pts)
    }

    fn sides(&self, other: &Poly3) -> Vec<BigInt> {
        self.pts.iter().map(|p| p.side(&other.normal, &other.offset)).collect()
    }
}

fn fan<T>(d: &[T]) -> Vec<[&T; 3]> {
    (1..d.len() - 1).map(|k| [&d[0], &d[k], &d[k + 1]]).collect()
}

/// Closed membership of a point already known to lie in the triangle's plane.
fn tri_contains(t: [&H3; 3], n: &I3, x: &H3) -> bool {
    let s: Vec<BigInt> = (0..3).map(|k| dot3(&cross3(&t[(k + 1) % 3].minus(t[k]), &x.minus(t[k])), n)).collect();
    !(s.iter().any(Signed::is_positive) && s.iter().any(Signed::is_negative))
}

/// Where a triangle touches a plane, given the side values `d` of its vertices.
fn cut(t: [&H3; 3], d: [&BigInt; 3]) -> Vec<H3> {
    let mut out = Vec::new();
    for k in 0..3 {
        let l = (k + 1) % 3;
        if d[k].is_zero() {
            out.push(t[k].clone());
        }
        if d[k].sign() * d[l].sign() == num_bigint::Sign::Minus {
            // Distances are d/w, so the crossing is (d_l x_k - d_k x_l) / (d_l w_k - d_k w_l).
            let x: I3 = std::array::from_fn(|i| d[l] * &t[k].x[i] - d[k] * &t[l].x[i]);
            let w = d[l] * &t[k].w - d[k] * &t[l].w;
            out.push(if w.is_negative() { H3 { x: x.map(|c| -c), w: -w } } else { H3 { x, w } });
        }
    }
    out
}

/// Extents along `dir` of each fan triangle's trace on the other polygon's plane.
fn traces(p: &Poly3, d: &[BigInt], dir: &I3) -> Vec<Option<[Along; 2]>> {
    p.tris()
        .into_iter()
        .zip(fan(d))
        .map(|(t, dt)| {
            let mut pts: Vec<Along> = cut(t, dt).into_iter().map(|h| Along::new(h, dir)).collect();
            pts.sort_by(Along::cmp);
            Some([pts.first()?.clone(), pts.last()?.clone()])
        })
        .collect()
}

/// A triple `(T_0, a, b)` seen from `T_0`, with the two ends of `T_0 ∩ T_a ∩ T_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalTriple {
    pub others: [usize; 2],
    pub ends: [Point4; 2],
}

/// A point of `T_0 ∩ T_a ∩ T_b ∩ T_c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalQuad {
    pub others: [usize; 3],
    pub point: Point4,
}

/// Triples and quadruples containing `t0`, given the polygons `t0 ∩ T_a` of its
/// intersecting neighbours `a`.
pub fn per_tetra_reduction(t0: &Tetrahedron4, neighbors: &[(usize, Vec<Point4>)]) -> Result<(Vec<LocalTriple>, Vec<LocalQuad>)> {
    use std::cmp::Ordering::{Greater, Less};
    let chart = Chart3::new(t0);
    let polys: Vec<Poly3> = neighbors.iter().map(|(_, poly)| Poly3::new(&chart, poly)).collect::<Result<_>>()?;
    let m = neighbors.len();
    let mut meets = vec![vec![false; m]; m];
    let mut triples = Vec::new();
    let apart = |d: &[BigInt]| d.iter().all(Signed::is_positive) || d.iter().all(Signed::is_negative);
    for x in 0..m {
        for y in x + 1..m {
            let (px, py) = (&polys[x], &polys[y]);
            let (dx, dy) = (px.sides(py), py.sides(px));
            if dx.iter().all(Zero::is_zero) {
                return Err(Error::DegeneratePosition);
            }
            if apart(&dx) || apart(&dy) {
                continue;
            }
            let dir = cross3(&px.normal, &py.normal);
            let (tx, ty) = (traces(px, &dx, &dir), traces(py, &dy, &dir));
            let mut lo: Option<&Along> = None;
            let mut hi: Option<&Along> = None;
            // Two fan triangles overlap on the common part of their traces.
            for [a0, a1] in tx.iter().flatten() {
                for [b0, b1] in ty.iter().flatten() {
                    let a = if a0.cmp(b0) == Less { b0 } else { a0 };
                    let b = if a1.cmp(b1) == Greater { b1 } else { a1 };
                    if a.cmp(b) == Greater {
                        continue;
                    }
                    if lo.is_none_or(|l| a.cmp(l) == Less) {
                        lo = Some(a);
                    }
                    if hi.is_none_or(|h| b.cmp(h) == Greater) {
                        hi = Some(b);
                    }
                }
            }
            let (Some(lo), Some(hi)) = (lo, hi) else { continue };
            if lo.cmp(hi) != Less {
                return Err(Error::DegeneratePosition);
            }
            meets[x][y] = true;
            meets[y][x] = true;
            let ends = [chart.lift(&lo.p.to_rational()), chart.lift(&hi.p.to_rational())];
            triples.push(LocalTriple { others: [neighbors[x].0, neighbors[y].0], ends });
        }
    }
    let mut quads = Vec::new();
    for x in 0..m {
        for y in x + 1..m {
            if !meets[x][y] {
                continue;
            }
            for z in y + 1..m {
                if !meets[x][z] || !meets[y][z] {
                    continue;
                }
                let k3 = [x, y, z];
                let a: Vec<Vec<ExactScalar>> = k3.iter().map(|&k| polys[k].normal.iter().map(|c| ExactScalar::from_integer(c.clone())).collect()).collect();
                let b: Vec<ExactScalar> = k3.iter().map(|&k| ExactScalar::from_integer(polys[k].offset.clone())).collect();
                let Some(sol) = kernel::solve(&a, &b) else {
                    return Err(Error::DegeneratePosition);
                };
                let p: V3 = [sol[0].clone(), sol[1].clone(), sol[2].clone()];
                let h = H3::of(&p);
                if k3.iter().all(|&k| polys[k].tris().into_iter().any(|t| tri_contains(t, &polys[k].normal, &h))) {
                    quads.push(LocalQuad { others: [neighbors[x].0, neighbors[y].0, neighbors[z].0], point: chart.lift(&p) });
                }
            }
        }
    }
    Ok((triples, quads))
}

/// Pairs, triples and vertices of the arrangement, in the same form as the
/// exhaustive oracle.
pub fn enumerate(tetrahedra: &[Tetrahedron4]) -> Result<Arrangement> {
    let n = tetrahedra.len();
    let found = pairwise(tetrahedra)?;
    let mut out = Arrangement::default();
    let mut verts: Vec<Entity> = Vec::new();
    let mut local: Vec<Vec<(usize, Vec<Point4>)>> = vec![Vec::new(); n];
    for w in &found {
        let (i, j) = w.pair;
        let poly = intersection_polygon(tetrahedra, i, j)?;
        let pts = poly.points();
        local[i].push((j, pts.clone()));
        local[j].push((i, pts));
        verts.extend(poly.vertices);
        out.pairs.push(Entity { tetrahedra: vec![i, j], kind: None, point: w.vertex.clone() });
    }
    let mut triples: BTreeMap<[usize; 3], Point4> = BTreeMap::new();
    let mut ftt: BTreeMap<Point4, [usize; 3]> = BTreeMap::new();
    let mut quads: BTreeMap<[usize; 4], Point4> = BTreeMap::new();
    for (t0, nb) in local.iter().enumerate() {
        if nb.len() < 2 {
            continue;
        }
        let (tr, qu) = per_tetra_reduction(&tetrahedra[t0], nb)?;
        for x in tr {
            let mut ids = [t0, x.others[0], x.others[1]];
            ids.sort_unstable();
            let first = x.ends.iter().min().expect("two ends").clone();
            triples.entry(ids).and_modify(|p| {
                if first < *p {
                    *p = first.clone();
                }
            }).or_insert(first);
            for e in x.ends {
                if let Some(prev) = ftt.insert(e, ids) {
                    if prev != ids {
                        return Err(Error::DegeneratePosition);
                    }
                }
            }
        }
        for x in qu {
            let mut ids = [t0, x.others[0], x.others[1], x.others[2]];
            ids.sort_unstable();
            if let Some(prev) = quads.insert(ids, x.point.clone()) {
                if prev != x.point {
                    return Err(Error::DegeneratePosition);
                }
            }
        }
    }
    out.triples = triples.into_iter().map(|(ids, p)| Entity { tetrahedra: ids.to_vec(), kind: None, point: p }).collect();
    verts.extend(ftt.into_iter().map(|(p, ids)| Entity { tetrahedra: ids.to_vec(), kind: Some(VertexKind::FaceTetraTetra), point: p }));
    verts.extend(quads.into_iter().map(|(ids, p)| Entity { tetrahedra: ids.to_vec(), kind: Some(VertexKind::Quad), point: p }));
    verts.sort();
    let distinct: BTreeSet<&Point4> = verts.iter().map(|v| &v.point).collect();
    if distinct.len() != verts.len() {
        return Err(Error::DegeneratePosition);
    }
    let mut by_kind = BTreeMap::new();
    for v in &verts {
        *by_kind.entry(kind_name(v.kind.expect("vertex kind")).to_string()).or_insert(0) += 1;
    }
    out.counts = KCounts { k2: out.pairs.len() as u64, k3: out.triples.len() as u64, k4: verts.len() as u64, by_kind };
    out.vertices = verts;
    Ok(out)
}

pub fn k_counts(tetrahedra: &[Tetrahedron4]) -> Result<KCounts> {
    Ok(enumerate(tetrahedra)?.counts)
}
