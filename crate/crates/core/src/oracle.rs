//! Brute-force reference answers.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    self, lp, segment_tetra_direct, tetra_contains, tri_tri_witness, ExactScalar, Point4, Segment4,
    Tetrahedron4, Triangle4,
};
use crate::report::{IntersectionReport, QueryMode, ReportBuilder};

fn all_pairs(na: usize, nb: usize, mode: QueryMode, mut f: impl FnMut(usize, usize) -> Option<Point4>) -> IntersectionReport {
    let mut out = ReportBuilder::new(mode);
    'outer: for i in 0..na {
        for j in 0..nb {
            if let Some(p) = f(i, j) {
                out.add(i, j, || p);
                if out.done() {
                    break 'outer;
                }
            }
        }
    }
    out.finish()
}

pub fn seg_tetra_query(segments: &[Segment4], tetrahedra: &[Tetrahedron4], mode: QueryMode) -> IntersectionReport {
    all_pairs(segments.len(), tetrahedra.len(), mode, |i, j| segment_tetra_direct(&segments[i], &tetrahedra[j]))
}

pub fn tetra_seg_query(tetrahedra: &[Tetrahedron4], segments: &[Segment4], mode: QueryMode) -> IntersectionReport {
    all_pairs(tetrahedra.len(), segments.len(), mode, |i, j| segment_tetra_direct(&segments[j], &tetrahedra[i]))
}

pub fn tri_tri_query(red: &[Triangle4], blue: &[Triangle4], mode: QueryMode) -> IntersectionReport {
    all_pairs(red.len(), blue.len(), mode, |i, j| tri_tri_witness(&red[i], &blue[j]))
}

/// Witness for a line meeting a 2-flat; a contained line is witnessed by its first point.
pub fn line_flat_witness(line: &Segment4, flat: &[Point4; 3]) -> Option<Point4> {
    match kernel::line_2flat_meet(line, flat) {
        Ok(p) => p,
        Err(Error::Contained) => Some(line.a().clone()),
        Err(_) => None,
    }
}

pub fn line_2flat_query(lines: &[Segment4], flats: &[[Point4; 3]], mode: QueryMode) -> IntersectionReport {
    all_pairs(lines.len(), flats.len(), mode, |i, j| line_flat_witness(&lines[i], &flats[j]))
}

/// First tetrahedron hit by the ray `origin + t direction`, `t >= 0`.
pub fn ray_shoot(origin: &Point4, direction: &[ExactScalar; 4], tetrahedra: &[Tetrahedron4]) -> Result<Option<(usize, Point4)>> {
    if direction.iter().all(Zero::is_zero) {
        return Err(Error::OutOfRange("ray direction is zero".into()));
    }
    let mut best: Option<(ExactScalar, usize)> = None;
    for (i, t) in tetrahedra.iter().enumerate() {
        if let Some(tt) = lp::ray_hull_min_t(origin, direction, t.vertices()) {
            if best.as_ref().is_none_or(|(b, _)| tt < *b) {
                best = Some((tt, i));
            }
        }
    }
    Ok(best.map(|(t, i)| (i, origin.add_vec(&direction.clone().map(|d| d * &t)))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VertexKind {
    EdgeTetra,
    FaceFace,
    FaceTetraTetra,
    Quad,
}

/// One counted arrangement entity with an exact witness.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entity {
    pub tetrahedra: Vec<usize>,
    pub kind: Option<VertexKind>,
    pub point: Point4,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KCounts {
    pub k2: u64,
    pub k3: u64,
    pub k4: u64,
    pub by_kind: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    pub counts: KCounts,
    pub pairs: Vec<Entity>,
    pub triples: Vec<Entity>,
    pub vertices: Vec<Entity>,
}

pub(crate) fn kind_name(k: VertexKind) -> &'static str {
    match k {
        VertexKind::EdgeTetra => "EDGE_TETRA",
        VertexKind::FaceFace => "FACE_FACE",
        VertexKind::FaceTetraTetra => "FACE_TETRA_TETRA",
        VertexKind::Quad => "QUAD",
    }
}

pub(crate) fn bbox_overlap(a: &Tetrahedron4, b: &Tetrahedron4) -> bool {
    (0..4).all(|c| {
        let lo = |t: &Tetrahedron4| t.vertices().iter().map(|v| v.coords()[c].clone()).min().unwrap();
        let hi = |t: &Tetrahedron4| t.vertices().iter().map(|v| v.coords()[c].clone()).max().unwrap();
        lo(a) <= hi(b) && lo(b) <= hi(a)
    })
}

/// Common point of the hyperplanes of the listed tetrahedra when they meet in exactly one point.
fn planes_point(ts: &[&Tetrahedron4]) -> Option<Point4> {
    let a: Vec<Vec<ExactScalar>> = ts.iter().map(|t| t.hyperplane().coeffs().to_vec()).collect();
    let b: Vec<ExactScalar> = ts.iter().map(|t| t.hyperplane().offset().clone()).collect();
    kernel::solve(&a, &b).map(|x| Point4::from_array(x.try_into().expect("four coordinates")))
}

/// Common segment of three tetrahedra, via their line of hyperplane intersection.
pub(crate) fn triple_segment(ts: [&Tetrahedron4; 3]) -> Result<Option<(Point4, Point4)>> {
    let mut m: Vec<Vec<ExactScalar>> = ts
        .iter()
        .map(|t| {
            let mut r = t.hyperplane().coeffs().to_vec();
            r.push(t.hyperplane().offset().clone());
            r
        })
        .collect();
    let piv = kernel::exact::row_echelon(&mut m);
    if piv.len() != 3 || piv.contains(&4) {
        return Err(Error::DegeneratePosition);
    }
    let free = (0..4).find(|c| !piv.contains(c)).expect("one free column");
    // x = base + s dir.
    let mut base = vec![ExactScalar::zero(); 4];
    let mut dir = vec![ExactScalar::zero(); 4];
    dir[free] = crate::kernel::q(1);
    for (r, &c) in piv.iter().enumerate() {
        base[c] = m[r][4].clone();
        dir[c] = -m[r][free].clone();
    }
    let base = Point4::from_array(base.try_into().unwrap());
    let dir: [ExactScalar; 4] = dir.try_into().unwrap();
    // Clip the parameter range by the barycentric constraints of each tetrahedron.
    let mut lo: Option<ExactScalar> = None;
    let mut hi: Option<ExactScalar> = None;
    for t in ts {
        for (c0, c1) in bary_affine(t, &base, &dir)? {
            // c0 + s c1 >= 0
            if c1.is_zero() {
                if c0 < ExactScalar::zero() {
                    return Ok(None);
                }
                continue;
            }
            let s = -&c0 / &c1;
            if c1 > ExactScalar::zero() {
                if lo.as_ref().is_none_or(|l| s > *l) {
                    lo = Some(s);
                }
            } else if hi.as_ref().is_none_or(|h| s < *h) {
                hi = Some(s);
            }
        }
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::DegeneratePosition);
    };
    if lo > hi {
        return Ok(None);
    }
    if lo == hi {
        return Err(Error::DegeneratePosition);
    }
    let at = |s: &ExactScalar| base.add_vec(&dir.clone().map(|d| d * s));
    Ok(Some((at(&lo), at(&hi))))
}

/// Barycentric coordinates of `base + s dir` (a line inside the tetrahedron's hyperplane) as affine functions of `s`.
fn bary_affine(t: &Tetrahedron4, base: &Point4, dir: &[ExactScalar; 4]) -> Result<Vec<(ExactScalar, ExactScalar)>> {
    let v = t.vertices();
    let cols: Vec<[ExactScalar; 4]> = (1..4).map(|i| v[i].sub(&v[0])).collect();
    let rel = base.sub(&v[0]);
    for skip in 0..4 {
        let keep: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let a: Vec<Vec<ExactScalar>> = keep.iter().map(|&r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        let b0: Vec<ExactScalar> = keep.iter().map(|&r| rel[r].clone()).collect();
        let b1: Vec<ExactScalar> = keep.iter().map(|&r| dir[r].clone()).collect();
        if let (Some(l0), Some(l1)) = (kernel::solve(&a, &b0), kernel::solve(&a, &b1)) {
            let one = crate::kernel::q(1);
            let s0: ExactScalar = l0.iter().sum();
            let s1: ExactScalar = l1.iter().sum();
            let mut out = vec![(one - s0, -s1)];
            out.extend(l0.into_iter().zip(l1));
            return Ok(out);
        }
    }
    Err(Error::DegenerateTetrahedron)
}

/// Exhaustive subset enumeration of intersecting pairs, triples and arrangement vertices.
///
/// Input vertices of the tetrahedra are not counted.
pub fn arrangement_k_counts(tetrahedra: &[Tetrahedron4]) -> Result<Arrangement> {
    let n = tetrahedra.len();
    let t = tetrahedra;
    let mut out = Arrangement::default();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if !bbox_overlap(&t[i], &t[j]) {
                continue;
            }
            if t[i].hyperplane() == t[j].hyperplane() {
                return Err(Error::DegeneratePosition);
            }
            if let Some(p) = lp::hull_intersection(t[i].vertices(), t[j].vertices()) {
                adj[i][j] = true;
                adj[j][i] = true;
                out.pairs.push(Entity { tetrahedra: vec![i, j], kind: None, point: p });
            }
        }
    }
    let mut verts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !adj[i][j] {
                continue;
            }
            for (a, b) in t[i].edges() {
                let e = Segment4::new(a.clone(), b.clone()).expect("tetra edges are proper");
                if let Some(p) = segment_tetra_direct(&e, &t[j]) {
                    verts.push(Entity { tetrahedra: vec![i, j], kind: Some(VertexKind::EdgeTetra), point: p });
                }
            }
            if i < j {
                for f in t[i].faces() {
                    for g in t[j].faces() {
                        if let Some(p) = face_meet(&f, &g)? {
                            verts.push(Entity { tetrahedra: vec![i, j], kind: Some(VertexKind::FaceFace), point: p });
                        }
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !adj[i][j] {
                continue;
            }
            for k in j + 1..n {
                if !adj[i][k] || !adj[j][k] {
                    continue;
                }
                let trip = [&t[i], &t[j], &t[k]];
                let Some((p0, _)) = triple_segment(trip)? else { continue };
                out.triples.push(Entity { tetrahedra: vec![i, j, k], kind: None, point: p0 });
                let ids = [i, j, k];
                for (x, &tx) in trip.iter().enumerate() {
                    let others: Vec<&Tetrahedron4> = (0..3).filter(|&y| y != x).map(|y| trip[y]).collect();
                    for f in tx.faces() {
                        let (p, in_face) = face_planes_point(&f, &others)?;
                        if in_face && others.iter().all(|o| tetra_contains(o, &p)) {
                            verts.push(Entity { tetrahedra: ids.to_vec(), kind: Some(VertexKind::FaceTetraTetra), point: p });
                        }
                    }
                }
                for l in k + 1..n {
                    if !adj[i][l] || !adj[j][l] || !adj[k][l] {
                        continue;
                    }
                    let quad = [&t[i], &t[j], &t[k], &t[l]];
                    let Some(p) = planes_point(&quad) else { return Err(Error::DegeneratePosition) };
                    if quad.iter().all(|q| tetra_contains(q, &p)) {
                        verts.push(Entity { tetrahedra: vec![i, j, k, l], kind: Some(VertexKind::Quad), point: p });
                    }
                }
            }
        }
    }
    verts.sort();
    let distinct: std::collections::BTreeSet<&Point4> = verts.iter().map(|v| &v.point).collect();
    if distinct.len() != verts.len() {
        return Err(Error::DegeneratePosition);
    }
    let mut by_kind = BTreeMap::new();
    for v in &verts {
        *by_kind.entry(kind_name(v.kind.expect("vertex kind")).to_string()).or_insert(0) += 1;
    }
    out.counts = KCounts {
        k2: out.pairs.len() as u64,
        k3: out.triples.len() as u64,
        k4: verts.len() as u64,
        by_kind,
    };
    out.vertices = verts;
    Ok(out)
}

/// The single common point of two 2-faces; faces that touch without their
/// 2-planes meeting in a point are degenerate.
pub(crate) fn face_meet(f: &Triangle4, g: &Triangle4) -> Result<Option<Point4>> {
    match kernel::tri_tri_direct(f, g) {
        Ok(p) => Ok(p),
        Err(_) if lp::hull_intersection(f.vertices(), g.vertices()).is_some() => Err(Error::DegeneratePosition),
        Err(_) => Ok(None),
    }
}

/// Point where the 2-plane of `f` meets the hyperplanes of two tetrahedra, and whether it lies in `f`.
pub(crate) fn face_planes_point(f: &Triangle4, others: &[&Tetrahedron4]) -> Result<(Point4, bool)> {
    let [p, q, r] = f.vertices();
    let d1 = q.sub(p);
    let d2 = r.sub(p);
    // p + a d1 + b d2 on both hyperplanes.
    let rows: Vec<Vec<ExactScalar>> = others
        .iter()
        .map(|t| {
            let c = t.hyperplane().coeffs();
            let dot = |v: &[ExactScalar; 4]| -> ExactScalar { (0..4).map(|i| &c[i] * &v[i]).sum() };
            vec![dot(&d1), dot(&d2)]
        })
        .collect();
    let rhs: Vec<ExactScalar> = others.iter().map(|t| -t.hyperplane().eval(p)).collect();
    let Some(ab) = kernel::solve(&rows, &rhs) else {
        return Err(Error::DegeneratePosition);
    };
    let z = ExactScalar::zero();
    let inside = ab[0] >= z && ab[1] >= z && &ab[0] + &ab[1] <= crate::kernel::q(1);
    let pt = Point4::from_array(std::array::from_fn(|i| &p.coords()[i] + &ab[0] * &d1[i] + &ab[1] * &d2[i]));
    Ok((pt, inside))
}
