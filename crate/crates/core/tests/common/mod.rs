#![allow(dead_code)]

use isect4d::kernel::{q, ExactScalar, Point4, Segment4, Tetrahedron4, Triangle4};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pt(v: [i64; 4]) -> Point4 {
    Point4::from_ints(v)
}

pub fn rand_point(r: &mut ChaCha8Rng, range: i64) -> Point4 {
    Point4::from_ints(std::array::from_fn(|_| r.gen_range(-range..=range)))
}

pub fn rand_segment(r: &mut ChaCha8Rng, range: i64) -> Segment4 {
    loop {
        if let Ok(s) = Segment4::new(rand_point(r, range), rand_point(r, range)) {
            return s;
        }
    }
}

pub fn rand_triangle(r: &mut ChaCha8Rng, range: i64) -> Triangle4 {
    loop {
        if let Ok(t) = Triangle4::new(rand_point(r, range), rand_point(r, range), rand_point(r, range)) {
            return t;
        }
    }
}

pub fn rand_tetra(r: &mut ChaCha8Rng, range: i64) -> Tetrahedron4 {
    loop {
        let v: [Point4; 4] = std::array::from_fn(|_| rand_point(r, range));
        let [a, b, c, d] = v;
        if let Ok(t) = Tetrahedron4::new(a, b, c, d) {
            return t;
        }
    }
}

/// Small tetrahedron near a random center, so that pairs intersect at a useful rate.
pub fn rand_local_tetra(r: &mut ChaCha8Rng, range: i64, size: i64) -> Tetrahedron4 {
    let c = rand_point(r, range);
    loop {
        let v: [Point4; 4] = std::array::from_fn(|_| {
            let off = rand_point(r, size);
            c.add_vec(off.coords())
        });
        let [a, b, c2, d] = v;
        if let Ok(t) = Tetrahedron4::new(a, b, c2, d) {
            return t;
        }
    }
}

/// Laplace expansion along the first row.
pub fn laplace_det(m: &[Vec<ExactScalar>]) -> ExactScalar {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ExactScalar::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<ExactScalar>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][j] * laplace_det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

pub fn hom_rows(pts: &[&Point4]) -> Vec<Vec<ExactScalar>> {
    pts.iter()
        .map(|p| {
            let mut r = p.coords().to_vec();
            r.push(ExactScalar::one());
            r
        })
        .collect()
}

/// Gauss-Jordan with partial search for nonzero pivots; `None` if singular.
pub fn gauss(mut a: Vec<Vec<ExactScalar>>, mut b: Vec<ExactScalar>) -> Option<Vec<ExactScalar>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                for k in c..n {
                    let v = &f * &a[c][k];
                    a[r][k] -= v;
                }
                let v = &f * &b[c];
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Independent segment/tetrahedron test for segments transversal to the tetra's hyperplane.
/// `None` when the segment is parallel to the hyperplane.
pub fn seg_tetra_transversal(e: &Segment4, t: &Tetrahedron4) -> Option<bool> {
    let v = t.vertices();
    // Normal by cofactors of the 3x4 edge matrix.
    let rows: Vec<Vec<ExactScalar>> = (1..4).map(|i| v[i].sub(&v[0]).to_vec()).collect();
    let normal: Vec<ExactScalar> = (0..4)
        .map(|k| {
            let minor: Vec<Vec<ExactScalar>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != k).map(|(_, x)| x.clone()).collect())
                .collect();
            let d = laplace_det(&minor);
            if k % 2 == 0 { d } else { -d }
        })
        .collect();
    let dot = |x: &[ExactScalar]| -> ExactScalar { normal.iter().zip(x).map(|(a, b)| a * b).sum() };
    let d = e.direction();
    let nd = dot(&d);
    if nd.is_zero() {
        return None;
    }
    let t_hit = (dot(v[0].coords()) - dot(e.a().coords())) / nd;
    if t_hit < ExactScalar::zero() || t_hit > ExactScalar::one() {
        return Some(false);
    }
    let x = e.a().lerp(e.b(), &t_hit);
    // Barycentric coordinates from the first three coordinates that give a nonsingular system.
    let rel = x.sub(&v[0]);
    for skip in 0..4 {
        let keep: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let a: Vec<Vec<ExactScalar>> = keep.iter().map(|&r| (1..4).map(|i| v[i].sub(&v[0])[r].clone()).collect()).collect();
        let b: Vec<ExactScalar> = keep.iter().map(|&r| rel[r].clone()).collect();
        if let Some(l) = gauss(a, b) {
            let s: ExactScalar = l.iter().sum();
            return Some(l.iter().all(|x| *x >= ExactScalar::zero()) && s <= ExactScalar::one());
        }
    }
    unreachable!("tetrahedron spans a 3-flat")
}

/// Independent triangle/triangle test for 2-planes meeting in one point. `None` otherwise.
pub fn tri_tri_point_oracle(a: &Triangle4, b: &Triangle4) -> Option<bool> {
    let [p1, q1, r1] = a.vertices();
    let [p2, q2, r2] = b.vertices();
    let cols = [q1.sub(p1), r1.sub(p1), q2.sub(p2).map(|x| -x), r2.sub(p2).map(|x| -x)];
    let m: Vec<Vec<ExactScalar>> = (0..4).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let sol = gauss(m, p2.sub(p1).to_vec())?;
    let z = ExactScalar::zero();
    let one = ExactScalar::one();
    let ok1 = sol[0] >= z && sol[1] >= z && &sol[0] + &sol[1] <= one;
    let ok2 = sol[2] >= z && sol[3] >= z && &sol[2] + &sol[3] <= one;
    Some(ok1 && ok2)
}

pub fn sum_one() -> ExactScalar {
    q(1)
}

/// Random point of the convex hull with small integer weights.
pub fn rand_hull_point(r: &mut ChaCha8Rng, v: &[Point4]) -> Point4 {
    let w: Vec<i64> = v.iter().map(|_| r.gen_range(1..8)).collect();
    let total: i64 = w.iter().sum::<i64>().max(1);
    Point4::from_array(std::array::from_fn(|i| {
        v.iter().zip(&w).map(|(p, &k)| &p.coords()[i] * q(k)).sum::<ExactScalar>() / q(total)
    }))
}

/// Segment through a random point near the tetrahedron; hits about half the time.
pub fn rand_segment_near(r: &mut ChaCha8Rng, v: &[Point4], range: i64) -> Segment4 {
    loop {
        let x = rand_hull_point(r, v);
        let d = rand_point(r, range);
        let nz = |r: &mut ChaCha8Rng| if r.gen_bool(0.5) { r.gen_range(1..=3) } else { -r.gen_range(1..=3) };
        let s1 = q(nz(r));
        let s2 = q(nz(r));
        let a = x.add_vec(&d.coords().clone().map(|c| c * &s1));
        let b = x.add_vec(&d.coords().clone().map(|c| c * &s2));
        if let Ok(s) = Segment4::new(a, b) {
            return s;
        }
    }
}

/// A triangle translated so that it passes near a point of `t`.
pub fn rand_triangle_near(r: &mut ChaCha8Rng, t: &Triangle4, range: i64) -> Triangle4 {
    let b = rand_triangle(r, range);
    let x = rand_hull_point(r, t.vertices());
    let y = rand_hull_point(r, b.vertices());
    let jitter = rand_point(r, range / 4);
    let shift: [ExactScalar; 4] = std::array::from_fn(|i| &x.coords()[i] - &y.coords()[i] + &jitter.coords()[i]);
    Triangle4::new(b.p().add_vec(&shift), b.q().add_vec(&shift), b.r().add_vec(&shift)).unwrap()
}
