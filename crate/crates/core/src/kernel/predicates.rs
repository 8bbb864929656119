use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::exact::{self, SmallMatrix, Solved, MAXN};
use super::lp;
use super::types::{collinear, plane_through, ExactScalar, Hyperplane4, Point4, Segment4, Sign, Tetrahedron4, Triangle4};
use crate::error::{Error, Result};

/// Sign of the 5x5 determinant with rows `(p, 1)`.
pub fn orient5(u0: &Point4, u1: &Point4, v00: &Point4, v01: &Point4, v11: &Point4) -> Sign {
    orient5_of(&[u0, u1, v00, v01, v11])
}

pub(crate) fn orient5_of(pts: &[&Point4; 5]) -> Sign {
    let mut m: SmallMatrix = [[0; MAXN]; MAXN];
    let mut small = true;
    for (i, p) in pts.iter().enumerate() {
        match p.small() {
            Some(c) => {
                for j in 0..4 {
                    m[i][j] = c[j] as i128;
                }
                m[i][4] = 1;
            }
            None => {
                small = false;
                break;
            }
        }
    }
    if small {
        return exact::det_small_sign(&m, 5);
    }
    let rows: Vec<Vec<ExactScalar>> = pts.iter().map(|p| p.hrow()).collect();
    exact::det_sign(&rows)
}

pub fn side_of_hyperplane(p: &Point4, h: &Hyperplane4) -> Sign {
    if let (Some(c), Some((n, off))) = (p.small(), h.small()) {
        let mut acc: Option<i128> = Some(-(*off as i128));
        for i in 0..4 {
            acc = acc.and_then(|a| a.checked_add((n[i] as i128).checked_mul(c[i] as i128)?));
        }
        if let Some(v) = acc {
            return Sign::of_i128(v);
        }
    }
    Sign::of(&h.eval(p))
}

pub fn hyperplane_of(t: &Tetrahedron4) -> Result<Hyperplane4> {
    plane_through(t.vertices())
}

/// Six-condition intersection test in general position.
pub fn segment_tetra_predicate(e: &Segment4, t: &Tetrahedron4) -> Result<bool> {
    let h = t.hyperplane();
    let sa = side_of_hyperplane(e.a(), h);
    let sb = side_of_hyperplane(e.b(), h);
    if sa.is_zero() || sb.is_zero() {
        return Err(Error::DegeneratePosition);
    }
    if sa == sb {
        return Ok(false);
    }
    let mut ok = true;
    for k in 0..4 {
        let [p, q, r] = t.facet(k);
        let d = orient5(e.a(), e.b(), p, q, r);
        if d.is_zero() {
            return Err(Error::DegeneratePosition);
        }
        ok &= sb * t.facet_sign(k) * d == Sign::Pos;
    }
    Ok(ok)
}

fn small_rows<const R: usize>(cols: &[&[i64; 4]], rhs: &[i64; 4], neg: [bool; R]) -> (SmallMatrix, [i128; MAXN]) {
    let mut a: SmallMatrix = [[0; MAXN]; MAXN];
    let mut b = [0i128; MAXN];
    for r in 0..4 {
        for (c, col) in cols.iter().enumerate() {
            let v = col[r] as i128;
            a[r][c] = if neg[c] { -v } else { v };
        }
        b[r] = rhs[r] as i128;
    }
    (a, b)
}

fn diff_small(p: &Point4, q: &Point4) -> Option<[i64; 4]> {
    let (a, b) = (p.small()?, q.small()?);
    let mut out = [0i64; 4];
    for i in 0..4 {
        out[i] = a[i].checked_sub(b[i])?;
    }
    Some(out)
}

fn rational_system(cols: &[[ExactScalar; 4]], rhs: &[ExactScalar; 4]) -> Option<Solved> {
    let n = cols.len();
    let rows: Vec<Vec<BigInt>> = (0..4)
        .map(|r| {
            let mut row: Vec<ExactScalar> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            exact::integerize(&row)
        })
        .collect();
    let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r[..n].to_vec()).collect();
    let b: Vec<BigInt> = rows.iter().map(|r| r[n].clone()).collect();
    exact::cramer_big(&a, &b).map(Solved::Big)
}

/// Solves `sum_c x_c cols[c] = rhs` for four columns in R^4.
fn solve4(
    small: Option<([[i64; 4]; 4], [i64; 4])>,
    exact_system: impl FnOnce() -> ([[ExactScalar; 4]; 4], [ExactScalar; 4]),
) -> Option<Solved> {
    if let Some((c, r)) = small {
        let (a, b) = small_rows(&[&c[0], &c[1], &c[2], &c[3]], &r, [false; 4]);
        return exact::cramer_fast(&a, &b, 4);
    }
    let (cols, rhs) = exact_system();
    rational_system(&cols, &rhs)
}

fn neg4(v: [ExactScalar; 4]) -> [ExactScalar; 4] {
    v.map(|x| -x)
}

fn neg4s(v: [i64; 4]) -> [i64; 4] {
    v.map(|x| -x)
}

fn small_box(s: &[&Point4]) -> Option<([i64; 4], [i64; 4])> {
    let mut lo = *s[0].small()?;
    let mut hi = lo;
    for p in &s[1..] {
        let c = p.small()?;
        for k in 0..4 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    Some((lo, hi))
}

/// Whether the bounding boxes of the two point sets are disjoint.
pub(crate) fn boxes_apart(a: &[&Point4], b: &[&Point4]) -> bool {
    if let (Some((al, ah)), Some((bl, bh))) = (small_box(a), small_box(b)) {
        return (0..4).any(|c| ah[c] < bl[c] || bh[c] < al[c]);
    }
    (0..4).any(|c| {
        let lo = |s: &[&Point4]| s.iter().map(|p| p.coords()[c].clone()).min().unwrap();
        let hi = |s: &[&Point4]| s.iter().map(|p| p.coords()[c].clone()).max().unwrap();
        hi(a) < lo(b) || hi(b) < lo(a)
    })
}

/// `o + sum_k x[idx[k]] * (v[k] - o)` computed in `i128` with one reduction per coordinate.
fn combine_small(s: &Solved, o: &Point4, v: &[&Point4], idx: &[usize]) -> Option<Point4> {
    let Solved::Small(num, den) = s else { return None };
    let o = o.small()?;
    let vs: Vec<&[i64; 4]> = v.iter().map(|p| p.small()).collect::<Option<_>>()?;
    let mut c: [i128; 4] = [0; 4];
    for (k, out) in c.iter_mut().enumerate() {
        let mut acc = (o[k] as i128).checked_mul(*den)?;
        for (p, &i) in vs.iter().zip(idx) {
            acc = acc.checked_add(num[i].checked_mul(p[k] as i128 - o[k] as i128)?)?;
        }
        *out = acc;
    }
    Some(Point4::from_array(c.map(|x| ExactScalar::new(BigInt::from(x), BigInt::from(*den)))))
}

/// A point of the closed segment `e` inside the closed tetrahedron `t`, if any.
pub fn segment_tetra_direct(e: &Segment4, t: &Tetrahedron4) -> Option<Point4> {
    let v = t.vertices();
    if boxes_apart(&[e.a(), e.b()], &[&v[0], &v[1], &v[2], &v[3]]) {
        return None;
    }
    let h = t.hyperplane();
    let sa = side_of_hyperplane(e.a(), h);
    let sb = side_of_hyperplane(e.b(), h);
    if sa == sb && !sa.is_zero() {
        return None;
    }
    let v = t.vertices();
    let small = (|| {
        let d = diff_small(e.b(), e.a())?;
        let e1 = diff_small(&v[1], &v[0])?;
        let e2 = diff_small(&v[2], &v[0])?;
        let e3 = diff_small(&v[3], &v[0])?;
        let r = diff_small(e.a(), &v[0])?;
        Some(([neg4s(d), e1, e2, e3], r))
    })();
    let system = || {
        let cols = [neg4(e.direction()), v[1].sub(&v[0]), v[2].sub(&v[0]), v[3].sub(&v[0])];
        (cols, e.a().sub(&v[0]))
    };
    match solve4(small, system) {
        Some(s) => {
            let inside = s.nonneg(0) && s.at_most_one(0) && (1..4).all(|i| s.nonneg(i)) && s.sum_at_most_one(&[1, 2, 3]);
            inside.then(|| combine_small(&s, e.a(), &[e.b()], &[0]).unwrap_or_else(|| e.a().lerp(e.b(), &s.value(0))))
        }
        None => lp::segment_hull_point(e, v),
    }
}

fn plane_pair_system(t1: &Triangle4, t2: &Triangle4) -> Option<Solved> {
    let [p1, q1, r1] = t1.vertices();
    let [p2, q2, r2] = t2.vertices();
    let small = (|| {
        Some((
            [
                diff_small(q1, p1)?,
                diff_small(r1, p1)?,
                neg4s(diff_small(q2, p2)?),
                neg4s(diff_small(r2, p2)?),
            ],
            diff_small(p2, p1)?,
        ))
    })();
    solve4(small, || ([q1.sub(p1), r1.sub(p1), neg4(q2.sub(p2)), neg4(r2.sub(p2))], p2.sub(p1)))
}

/// The meet point of the two supporting 2-planes if it lies in both closed triangles.
pub fn tri_tri_direct(t1: &Triangle4, t2: &Triangle4) -> Result<Option<Point4>> {
    let s = plane_pair_system(t1, t2).ok_or(Error::DegeneratePosition)?;
    let in1 = s.nonneg(0) && s.nonneg(1) && s.sum_at_most_one(&[0, 1]);
    let in2 = s.nonneg(2) && s.nonneg(3) && s.sum_at_most_one(&[2, 3]);
    if !(in1 && in2) {
        return Ok(None);
    }
    let [p1, q1, r1] = t1.vertices();
    if let Some(p) = combine_small(&s, p1, &[q1, r1], &[0, 1]) {
        return Ok(Some(p));
    }
    let a = s.value(0);
    let b = s.value(1);
    let pt: [ExactScalar; 4] = std::array::from_fn(|i| {
        &p1.coords()[i] + &a * (&q1.coords()[i] - &p1.coords()[i]) + &b * (&r1.coords()[i] - &p1.coords()[i])
    });
    Ok(Some(Point4::from_array(pt)))
}

/// Intersection witness for any pair of triangles, degenerate ones included.
pub fn tri_tri_witness(t1: &Triangle4, t2: &Triangle4) -> Option<Point4> {
    let ([a0, a1, a2], [b0, b1, b2]) = (t1.vertices(), t2.vertices());
    if boxes_apart(&[a0, a1, a2], &[b0, b1, b2]) {
        return None;
    }
    match tri_tri_direct(t1, t2) {
        Ok(p) => p,
        Err(_) => lp::hull_intersection(t1.vertices(), t2.vertices()),
    }
}

/// Six-orientation intersection test for triangles whose 2-planes meet in a point.
pub fn tri_tri_predicate(t1: &Triangle4, t2: &Triangle4) -> Result<bool> {
    if plane_pair_system(t1, t2).is_none() {
        return Err(Error::DegeneratePosition);
    }
    let mut first = Sign::Zero;
    let mut same = true;
    for (a, b) in [(t1, t2), (t2, t1)] {
        let [p, q, r] = b.vertices();
        for (x, y) in a.edges() {
            let d = orient5(x, y, p, q, r);
            if d.is_zero() {
                return Err(Error::DegeneratePosition);
            }
            if first.is_zero() {
                first = d;
            }
            same &= d == first;
        }
    }
    Ok(same)
}

/// The common point of the full line through `e` and the 2-flat through `f`.
pub fn line_2flat_meet(e: &Segment4, f: &[Point4; 3]) -> Result<Option<Point4>> {
    let [p, q, r] = f;
    if orient5(e.a(), e.b(), p, q, r) != Sign::Zero {
        return Ok(None);
    }
    if collinear(p, q, r) {
        return Err(Error::InvalidObject("2-flat points are collinear".into()));
    }
    let d = e.direction();
    let g1 = q.sub(p);
    let g2 = r.sub(p);
    let rhs = p.sub(e.a());
    let mut m: Vec<Vec<ExactScalar>> = (0..4)
        .map(|i| vec![d[i].clone(), -g1[i].clone(), -g2[i].clone(), rhs[i].clone()])
        .collect();
    let pivots = exact::row_echelon(&mut m);
    if pivots.contains(&3) {
        return Ok(None);
    }
    if pivots.len() == 3 {
        let t = m[0][3].clone();
        return Ok(Some(e.a().lerp(e.b(), &t)));
    }
    Err(Error::Contained)
}

/// Whether `p` lies in the closed tetrahedron `t`.
pub fn tetra_contains(t: &Tetrahedron4, p: &Point4) -> bool {
    if !side_of_hyperplane(p, t.hyperplane()).is_zero() {
        return false;
    }
    let v = t.vertices();
    let one = ExactScalar::one();
    // p = v0 + sum l_i (v_i - v0) restricted to three independent coordinates.
    let cols: Vec<[ExactScalar; 4]> = (1..4).map(|i| v[i].sub(&v[0])).collect();
    let rhs = p.sub(&v[0]);
    for skip in 0..4 {
        let keep: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let a: Vec<Vec<ExactScalar>> = keep
            .iter()
            .map(|&r| cols.iter().map(|c| c[r].clone()).collect())
            .collect();
        let b: Vec<ExactScalar> = keep.iter().map(|&r| rhs[r].clone()).collect();
        if let Some(l) = exact::solve(&a, &b) {
            let sum: ExactScalar = l.iter().sum();
            return l.iter().all(|x| *x >= ExactScalar::zero()) && sum <= one;
        }
    }
    false
}
