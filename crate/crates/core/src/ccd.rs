//! Collision detection for linearly moving tetrahedra, by lifting to R^4 with time as `w`.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::kernel::{
    format_scalar, lp, parse_scalar, segment_tetra_direct, tri_tri_witness, ExactScalar, Point4, Segment4, Shear,
    Tetrahedron4, Triangle4,
};
use crate::rangetree::{batched_budget, SegmentStructure, TetraStructure, TriangleStructure};
use crate::report::{IntersectionReport, QueryMode, ReportBuilder};

pub type Vec3 = [ExactScalar; 3];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MovingTetrahedron {
    vertices: [Vec3; 4],
    velocity: Vec3,
    t0: ExactScalar,
    t1: ExactScalar,
}

fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> ExactScalar {
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * (&b[0] * &c[2] - &b[2] * &c[0]) + &a[2] * (&b[0] * &c[1] - &b[1] * &c[0])
}

fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    std::array::from_fn(|i| &a[i] - &b[i])
}

impl MovingTetrahedron {
    pub fn new(vertices: [Vec3; 4], velocity: Vec3, t0: ExactScalar, t1: ExactScalar) -> Result<MovingTetrahedron> {
        if t0 >= t1 {
            return Err(Error::InvalidObject("empty time window".into()));
        }
        let [a, b, c, d] = &vertices;
        if det3(&sub3(b, a), &sub3(c, a), &sub3(d, a)).is_zero() {
            return Err(Error::DegenerateTetrahedron);
        }
        Ok(MovingTetrahedron { vertices, velocity, t0, t1 })
    }

    pub fn from_ints(v: [[i64; 3]; 4], u: [i64; 3], t0: i64, t1: i64) -> Result<MovingTetrahedron> {
        let q = crate::kernel::q;
        MovingTetrahedron::new(v.map(|p| p.map(q)), u.map(q), q(t0), q(t1))
    }

    pub fn vertices(&self) -> &[Vec3; 4] {
        &self.vertices
    }

    pub fn velocity(&self) -> &Vec3 {
        &self.velocity
    }

    pub fn window(&self) -> (&ExactScalar, &ExactScalar) {
        (&self.t0, &self.t1)
    }

    /// Vertex positions at time `t`.
    pub fn at(&self, t: &ExactScalar) -> [Vec3; 4] {
        self.vertices.clone().map(|v| std::array::from_fn(|i| &v[i] + &self.velocity[i] * t))
    }

    /// 12 vertex coordinates, 3 velocity components, then `t0` and `t1`.
    pub fn to_strings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.vertices.iter().flatten().map(format_scalar).collect();
        out.extend(self.velocity.iter().map(format_scalar));
        out.push(format_scalar(&self.t0));
        out.push(format_scalar(&self.t1));
        out
    }

    pub fn parse(s: &[impl AsRef<str>]) -> Result<MovingTetrahedron> {
        if s.len() != 17 {
            return Err(Error::Schema(format!("moving tetrahedron needs 17 values, got {}", s.len())));
        }
        let v: Vec<ExactScalar> = s.iter().map(|x| parse_scalar(x.as_ref())).collect::<Result<_>>()?;
        let p = |i: usize| -> Vec3 { std::array::from_fn(|k| v[3 * i + k].clone()) };
        MovingTetrahedron::new([p(0), p(1), p(2), p(3)], p(4), v[15].clone(), v[16].clone())
    }
}

/// `normal . p <= offset` on the closed side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace4 {
    pub normal: [ExactScalar; 4],
    pub offset: ExactScalar,
}

impl Halfspace4 {
    pub fn value(&self, p: &Point4) -> ExactScalar {
        let mut acc = -self.offset.clone();
        for i in 0..4 {
            acc += &self.normal[i] * &p.coords()[i];
        }
        acc
    }

    pub fn contains(&self, p: &Point4) -> bool {
        self.value(p) <= ExactScalar::zero()
    }
}

/// The swept volume of a moving tetrahedron as a convex polytope in R^4.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prism4 {
    vertices: [Point4; 8],
    facets: Vec<Tetrahedron4>,
    triangles: Vec<Triangle4>,
    halfspaces: Vec<Halfspace4>,
}

/// Vertex triples of the tetrahedron's faces, opposite vertex `k`.
const FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn lift(mt: &MovingTetrahedron) -> Prism4 {
    let at = |t: &ExactScalar| -> [Point4; 4] {
        mt.at(t).map(|[x, y, z]| Point4::new(x, y, z, t.clone()))
    };
    let [a, b, c, d] = at(&mt.t0);
    let [e, f, g, h] = at(&mt.t1);
    Prism4::from_vertices([a, b, c, d, e, f, g, h]).expect("lifted prism is full-dimensional")
}

impl Prism4 {
    /// Builds the prism from its bottom vertices `0..4` and matching top vertices `4..8`.
    pub fn from_vertices(v: [Point4; 8]) -> Result<Prism4> {
        let tet = |i: usize, j: usize, k: usize, l: usize| Tetrahedron4::new(v[i].clone(), v[j].clone(), v[k].clone(), v[l].clone());
        let tri = |i: usize, j: usize, k: usize| Triangle4::new(v[i].clone(), v[j].clone(), v[k].clone());
        let mut facets = vec![tet(0, 1, 2, 3)?, tet(4, 5, 6, 7)?];
        for [a, b, c] in FACES {
            // Staircase: each side quad (x, y) gets the diagonal from top x to bottom y.
            facets.push(tet(a, b, c, a + 4)?);
            facets.push(tet(b, c, a + 4, b + 4)?);
            facets.push(tet(c, a + 4, b + 4, c + 4)?);
        }
        let mut triangles = Vec::with_capacity(20);
        for base in [0, 4] {
            for [a, b, c] in FACES {
                triangles.push(tri(base + a, base + b, base + c)?);
            }
        }
        for (x, y) in PAIRS {
            triangles.push(tri(x, y, x + 4)?);
            triangles.push(tri(y, x + 4, y + 4)?);
        }
        let mut halfspaces = Vec::with_capacity(6);
        let mut orient = |t: &Tetrahedron4, probe: &Point4| {
            let h = t.hyperplane();
            let mut hs = Halfspace4 { normal: h.coeffs().clone(), offset: h.offset().clone() };
            if hs.value(probe) > ExactScalar::zero() {
                hs.normal = hs.normal.map(|x| -x);
                hs.offset = -hs.offset;
            }
            halfspaces.push(hs);
        };
        orient(&facets[0], &v[4]);
        orient(&facets[1], &v[0]);
        for (k, _) in FACES.iter().enumerate() {
            orient(&facets[2 + 3 * k], &v[k]);
        }
        Ok(Prism4 { vertices: v, facets, triangles, halfspaces })
    }

    pub fn vertices(&self) -> &[Point4; 8] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Tetrahedron4] {
        &self.facets
    }

    pub fn triangles(&self) -> &[Triangle4] {
        &self.triangles
    }

    pub fn halfspaces(&self) -> &[Halfspace4] {
        &self.halfspaces
    }

    pub fn edges(&self) -> Vec<Segment4> {
        let v = &self.vertices;
        let mut out = Vec::with_capacity(16);
        for base in [0, 4] {
            for (x, y) in PAIRS {
                out.push(Segment4::new(v[base + x].clone(), v[base + y].clone()).expect("distinct vertices"));
            }
        }
        for i in 0..4 {
            out.push(Segment4::new(v[i].clone(), v[i + 4].clone()).expect("distinct vertices"));
        }
        out
    }

    pub fn contains(&self, p: &Point4) -> bool {
        self.halfspaces.iter().all(|h| h.contains(p))
    }

    fn bbox(&self) -> [(ExactScalar, ExactScalar); 4] {
        std::array::from_fn(|c| {
            let it = || self.vertices.iter().map(|v| &v.coords()[c]);
            (it().min().unwrap().clone(), it().max().unwrap().clone())
        })
    }
}

/// A common point of two prisms, found in a fixed order: vertex containment,
/// edges against facets, then boundary triangles.
pub fn prisms_intersect(p: &Prism4, q: &Prism4) -> Option<Point4> {
    let (bp, bq) = (p.bbox(), q.bbox());
    if (0..4).any(|c| bp[c].1 < bq[c].0 || bq[c].1 < bp[c].0) {
        return None;
    }
    if let Some(v) = p.vertices.iter().find(|v| q.contains(v)) {
        return Some(v.clone());
    }
    if let Some(v) = q.vertices.iter().find(|v| p.contains(v)) {
        return Some(v.clone());
    }
    for (a, b) in [(p, q), (q, p)] {
        for e in a.edges() {
            for f in &b.facets {
                if let Some(w) = segment_tetra_direct(&e, f) {
                    return Some(w);
                }
            }
        }
    }
    for s in &p.triangles {
        for t in &q.triangles {
            if let Some(w) = tri_tri_witness(s, t) {
                return Some(w);
            }
        }
    }
    None
}

/// Whether the two tetrahedra overlap at the instant `t`.
pub fn instant_intersects(a: &MovingTetrahedron, b: &MovingTetrahedron, t: &ExactScalar) -> bool {
    let embed = |m: &MovingTetrahedron| -> Vec<Point4> {
        m.at(t).into_iter().map(|[x, y, z]| Point4::new(x, y, z, ExactScalar::zero())).collect()
    };
    lp::hull_intersection(&embed(a), &embed(b)).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CcdOptions {
    /// Subproblems with at most this many tetrahedra are solved exhaustively.
    pub threshold: usize,
    /// Salt of the shear applied before building range structures.
    pub seed: u64,
}

impl Default for CcdOptions {
    fn default() -> Self {
        CcdOptions { threshold: 32, seed: 0 }
    }
}

fn emit(prisms: &[Prism4], pairs: BTreeSet<(usize, usize)>, mode: QueryMode) -> IntersectionReport {
    let mut out = ReportBuilder::new(mode);
    for (i, j) in pairs {
        if out.done() {
            break;
        }
        let Some(w) = prisms_intersect(&prisms[i], &prisms[j]) else {
            debug_assert!(false, "pair ({i}, {j}) without a common point");
            continue;
        };
        out.add(i, j, || w);
    }
    out.finish()
}

/// Exhaustive test of every pair of lifted prisms.
pub fn detect_collisions_oracle(scene: &[MovingTetrahedron], mode: QueryMode) -> IntersectionReport {
    let prisms: Vec<Prism4> = scene.iter().map(lift).collect();
    let mut out = ReportBuilder::new(mode);
    'outer: for i in 0..prisms.len() {
        for j in i + 1..prisms.len() {
            if let Some(w) = prisms_intersect(&prisms[i], &prisms[j]) {
                out.add(i, j, || w);
                if out.done() {
                    break 'outer;
                }
            }
        }
    }
    out.finish()
}

pub fn detect_collisions(scene: &[MovingTetrahedron], mode: QueryMode) -> IntersectionReport {
    detect_collisions_with(scene, mode, CcdOptions::default())
}

/// Pairs of colliding tetrahedra; the witness `w` coordinate is a collision time.
pub fn detect_collisions_with(scene: &[MovingTetrahedron], mode: QueryMode, opts: CcdOptions) -> IntersectionReport {
    let prisms: Vec<Prism4> = scene.iter().map(lift).collect();
    let shear = Shear::new(opts.seed);
    let sheared: Vec<Prism4> = prisms
        .iter()
        .map(|p| Prism4::from_vertices(p.vertices.clone().map(|v| shear.apply(&v))).expect("shear is invertible"))
        .collect();
    let ids: Vec<usize> = (0..scene.len()).collect();
    let mut pairs = BTreeSet::new();
    let solver = Solver { prisms: &prisms, sheared: &sheared, threshold: opts.threshold.max(1), seed: opts.seed };
    solver.solve(&ids, &mut pairs);
    emit(&prisms, pairs, mode)
}

struct Solver<'a> {
    prisms: &'a [Prism4],
    sheared: &'a [Prism4],
    threshold: usize,
    seed: u64,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl Solver<'_> {
    fn solve(&self, ids: &[usize], out: &mut BTreeSet<(usize, usize)>) {
        if ids.len() <= self.threshold {
            for (x, &i) in ids.iter().enumerate() {
                for &j in &ids[x + 1..] {
                    if prisms_intersect(&self.prisms[i], &self.prisms[j]).is_some() {
                        out.insert(ordered(i, j));
                    }
                }
            }
            return;
        }
        let (l, r) = ids.split_at(ids.len() / 2);
        self.solve(l, out);
        self.solve(r, out);
        self.bichromatic(l, r, out);
    }

    fn bichromatic(&self, l: &[usize], r: &[usize], out: &mut BTreeSet<(usize, usize)>) {
        for &i in l {
            for &j in r {
                let (p, q) = (&self.prisms[i], &self.prisms[j]);
                if q.contains(&p.vertices[0]) || p.contains(&q.vertices[0]) {
                    out.insert(ordered(i, j));
                }
            }
        }
        let edges_l: Vec<Segment4> = l.iter().flat_map(|&i| self.sheared[i].edges()).collect();
        let edges_r: Vec<Segment4> = r.iter().flat_map(|&i| self.sheared[i].edges()).collect();
        let facets_l: Vec<Tetrahedron4> = l.iter().flat_map(|&i| self.sheared[i].facets.clone()).collect();
        let facets_r: Vec<Tetrahedron4> = r.iter().flat_map(|&i| self.sheared[i].facets.clone()).collect();
        let tris_l: Vec<Triangle4> = l.iter().flat_map(|&i| self.sheared[i].triangles.clone()).collect();
        let tris_r: Vec<Triangle4> = r.iter().flat_map(|&i| self.sheared[i].triangles.clone()).collect();
        let own_edges_l = collect_owner(l, 16);
        let own_edges_r = collect_owner(r, 16);
        let own_facets_l = collect_owner(l, 14);
        let own_facets_r = collect_owner(r, 14);
        let own_tris_l = collect_owner(l, 20);
        let own_tris_r = collect_owner(r, 20);

        let mut found = |a: &[usize], b: &[usize], rep: IntersectionReport| {
            for h in rep.pairs {
                out.insert(ordered(a[h.a], b[h.b]));
            }
        };
        match batched_budget(edges_l.len() as u64, facets_r.len() as u64) {
            Some(bud) => {
                let s = TetraStructure::build(&facets_r, bud, self.seed).expect("budget matches input");
                found(&own_edges_l, &own_facets_r, s.query_batch(&edges_l, QueryMode::Report).0);
            }
            None => found(&own_edges_l, &own_facets_r, crate::oracle::seg_tetra_query(&edges_l, &facets_r, QueryMode::Report)),
        }
        match batched_budget(facets_l.len() as u64, edges_r.len() as u64) {
            Some(bud) => {
                let s = SegmentStructure::build(&edges_r, bud, self.seed).expect("budget matches input");
                found(&own_facets_l, &own_edges_r, s.query_batch(&facets_l, QueryMode::Report).0);
            }
            None => found(&own_facets_l, &own_edges_r, crate::oracle::tetra_seg_query(&facets_l, &edges_r, QueryMode::Report)),
        }
        match batched_budget(tris_l.len() as u64, tris_r.len() as u64) {
            Some(bud) => {
                let s = TriangleStructure::build(&tris_r, bud, self.seed).expect("budget matches input");
                found(&own_tris_l, &own_tris_r, s.query_batch(&tris_l, QueryMode::Report).0);
            }
            None => found(&own_tris_l, &own_tris_r, crate::oracle::tri_tri_query(&tris_l, &tris_r, QueryMode::Report)),
        }
    }
}

fn collect_owner(ids: &[usize], per: usize) -> Vec<usize> {
    ids.iter().flat_map(|&i| std::iter::repeat_n(i, per)).collect()
}
