//! Exact feasibility by enumeration of basic solutions of `E x = f, x >= 0`.

use num_traits::{One, Signed, Zero};

use super::exact;
use super::types::{q, ExactScalar, Point4, Segment4};

/// Visits basic feasible solutions in lexicographic basis order until `visit` returns false.
pub fn for_each_vertex(e: &[Vec<ExactScalar>], f: &[ExactScalar], mut visit: impl FnMut(Vec<ExactScalar>) -> bool) {
    let cols = e.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<ExactScalar>> = e
        .iter()
        .zip(f)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let pivots = exact::row_echelon(&mut m);
    if pivots.contains(&cols) {
        return;
    }
    let rank = pivots.len();
    if rank == 0 {
        visit(vec![ExactScalar::zero(); cols]);
        return;
    }
    let rows = &m[..rank];
    let mut basis: Vec<usize> = (0..rank).collect();
    loop {
        let a: Vec<Vec<ExactScalar>> = rows
            .iter()
            .map(|r| basis.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let b: Vec<ExactScalar> = rows.iter().map(|r| r[cols].clone()).collect();
        if let Some(x) = exact::solve(&a, &b) {
            if x.iter().all(|v| !v.is_negative()) {
                let mut full = vec![ExactScalar::zero(); cols];
                for (&c, v) in basis.iter().zip(x) {
                    full[c] = v;
                }
                if !visit(full) {
                    return;
                }
            }
        }
        // Next combination.
        let mut i = rank;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if basis[i] < cols - rank + i {
                basis[i] += 1;
                for j in i + 1..rank {
                    basis[j] = basis[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn first_vertex(e: &[Vec<ExactScalar>], f: &[ExactScalar]) -> Option<Vec<ExactScalar>> {
    let mut out = None;
    for_each_vertex(e, f, |x| {
        out = Some(x);
        false
    });
    out
}

fn combo(points: &[Point4], lambda: &[ExactScalar]) -> Point4 {
    Point4::from_array(std::array::from_fn(|i| {
        points
            .iter()
            .zip(lambda)
            .map(|(p, l)| &p.coords()[i] * l)
            .sum()
    }))
}

/// A common point of two convex hulls.
pub fn hull_intersection(a: &[Point4], b: &[Point4]) -> Option<Point4> {
    let (na, nb) = (a.len(), b.len());
    let mut e = Vec::new();
    let mut f = Vec::new();
    for c in 0..4 {
        let mut row: Vec<ExactScalar> = a.iter().map(|p| p.coords()[c].clone()).collect();
        row.extend(b.iter().map(|p| -p.coords()[c].clone()));
        e.push(row);
        f.push(ExactScalar::zero());
    }
    let mut ra = vec![ExactScalar::one(); na];
    ra.extend(vec![ExactScalar::zero(); nb]);
    let mut rb = vec![ExactScalar::zero(); na];
    rb.extend(vec![ExactScalar::one(); nb]);
    e.push(ra);
    e.push(rb);
    f.push(q(1));
    f.push(q(1));
    let x = first_vertex(&e, &f)?;
    Some(combo(a, &x[..na]))
}

/// Point of a closed segment inside a convex hull.
pub fn segment_hull_point(s: &Segment4, hull: &[Point4]) -> Option<Point4> {
    let d = s.direction();
    let n = hull.len();
    // Variables: t, slack, lambda_0..lambda_{n-1}.
    let mut e = Vec::new();
    let mut f = Vec::new();
    for c in 0..4 {
        let mut row = vec![-d[c].clone(), ExactScalar::zero()];
        row.extend(hull.iter().map(|p| p.coords()[c].clone()));
        e.push(row);
        f.push(s.a().coords()[c].clone());
    }
    let mut sum = vec![ExactScalar::zero(), ExactScalar::zero()];
    sum.extend(vec![ExactScalar::one(); n]);
    e.push(sum);
    f.push(q(1));
    let mut cap = vec![ExactScalar::one(), ExactScalar::one()];
    cap.extend(vec![ExactScalar::zero(); n]);
    e.push(cap);
    f.push(q(1));
    let x = first_vertex(&e, &f)?;
    Some(s.a().lerp(s.b(), &x[0]))
}

/// Smallest `t >= 0` with `origin + t dir` in the hull.
pub fn ray_hull_min_t(origin: &Point4, dir: &[ExactScalar; 4], hull: &[Point4]) -> Option<ExactScalar> {
    let n = hull.len();
    let mut e = Vec::new();
    let mut f = Vec::new();
    for c in 0..4 {
        let mut row = vec![-dir[c].clone()];
        row.extend(hull.iter().map(|p| p.coords()[c].clone()));
        e.push(row);
        f.push(origin.coords()[c].clone());
    }
    let mut sum = vec![ExactScalar::zero()];
    sum.extend(vec![ExactScalar::one(); n]);
    e.push(sum);
    f.push(q(1));
    let mut best: Option<ExactScalar> = None;
    for_each_vertex(&e, &f, |x| {
        if best.as_ref().is_none_or(|b| x[0] < *b) {
            best = Some(x[0].clone());
        }
        true
    });
    best
}
