mod common;

use std::collections::BTreeSet;

use common::*;
use isect4d::kernel::*;
use isect4d::oracle::*;
use isect4d::{Error, IntersectionReport, QueryMode};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

const MODES: [QueryMode; 3] = [QueryMode::Detect, QueryMode::Count, QueryMode::Report];

fn simplex() -> Tetrahedron4 {
    Tetrahedron4::new(pt([1, 0, 0, 0]), pt([0, 1, 0, 0]), pt([0, 0, 1, 0]), pt([0, 0, 0, 1])).unwrap()
}

fn quarter() -> Point4 {
    Point4::new(qr(1, 4), qr(1, 4), qr(1, 4), qr(1, 4))
}

fn seg_scene(seed: u64, n: usize, m: usize) -> (Vec<Segment4>, Vec<Tetrahedron4>) {
    let mut r = rng(seed);
    let tets: Vec<Tetrahedron4> = (0..m).map(|_| rand_local_tetra(&mut r, 1000, 500)).collect();
    let segs = (0..n)
        .map(|i| if i % 4 == 0 { rand_segment(&mut r, 1000) } else { let k = r.gen_range(0..m); rand_segment_near(&mut r, tets[k].vertices(), 400) })
        .collect();
    (segs, tets)
}

fn tri_scene(seed: u64, n: usize) -> (Vec<Triangle4>, Vec<Triangle4>) {
    let mut r = rng(seed);
    let blue: Vec<Triangle4> = (0..n).map(|_| rand_triangle(&mut r, 1000)).collect();
    let red = (0..n).map(|_| { let b = blue[r.gen_range(0..n)].clone(); rand_triangle_near(&mut r, &b, 1000) }).collect();
    (red, blue)
}

fn pair_set(rep: &IntersectionReport) -> BTreeSet<(usize, usize)> {
    rep.pairs.iter().map(|h| (h.a, h.b)).collect()
}

fn check_modes(run: impl Fn(QueryMode) -> IntersectionReport) -> IntersectionReport {
    let [d, c, r] = MODES.map(&run);
    assert_eq!(d.detected, c.count > 0);
    assert_eq!(c.detected, c.count > 0);
    assert_eq!(r.count, r.pairs.len() as u64);
    assert_eq!(r.count, c.count);
    assert_eq!(d.detected, !r.pairs.is_empty());
    assert!(r.pairs.windows(2).all(|w| (w[0].a, w[0].b) < (w[1].a, w[1].b)));
    r
}

#[test]
fn seg_tetra_examples() {
    let t = simplex();
    for mode in MODES {
        let rep = seg_tetra_query(&[], std::slice::from_ref(&t), mode);
        assert!(!rep.detected);
        assert_eq!(rep.count, 0);
    }
    let hit = Segment4::new(pt([0, 0, 0, 0]), pt([1, 1, 1, 1])).unwrap();
    let rep = seg_tetra_query(std::slice::from_ref(&hit), std::slice::from_ref(&t), QueryMode::Report);
    assert_eq!(rep.count, 1);
    assert_eq!(rep.pairs[0].witness, quarter());
    assert_eq!(tetra_seg_query(&[t], &[hit], QueryMode::Count).count, 1);
}

#[test]
fn seg_tetra_matches_second_brute_force() {
    for seed in 0..3 {
        let (segs, tets) = seg_scene(seed, 50, 50);
        let rep = check_modes(|m| seg_tetra_query(&segs, &tets, m));
        let mut want = BTreeSet::new();
        for (i, e) in segs.iter().enumerate() {
            for (j, t) in tets.iter().enumerate() {
                if seg_tetra_transversal(e, t).expect("generic pair") {
                    want.insert((i, j));
                }
            }
        }
        assert_eq!(pair_set(&rep), want);
        assert!(want.len() > 20, "{}", want.len());
        for h in &rep.pairs {
            assert!(tetra_contains(&tets[h.b], &h.witness));
        }
    }
}

#[test]
fn tetra_seg_mirrors_seg_tetra() {
    let (segs, tets) = seg_scene(4, 50, 50);
    let a = check_modes(|m| seg_tetra_query(&segs, &tets, m));
    let b = check_modes(|m| tetra_seg_query(&tets, &segs, m));
    let flipped: BTreeSet<(usize, usize)> = pair_set(&b).into_iter().map(|(i, j)| (j, i)).collect();
    assert_eq!(pair_set(&a), flipped);
    for h in &b.pairs {
        let mirror = a.pairs.iter().find(|g| (g.a, g.b) == (h.b, h.a)).unwrap();
        assert_eq!(mirror.witness, h.witness);
    }
    let empty = tetra_seg_query(&tets, &[], QueryMode::Report);
    assert_eq!((empty.detected, empty.count), (false, 0));
}

#[test]
fn tri_tri_examples() {
    let t1 = Triangle4::new(pt([0, 0, 0, 0]), pt([2, 0, 0, 0]), pt([0, 2, 0, 0])).unwrap();
    let h = qr(1, 2);
    let t2 = Triangle4::new(
        Point4::new(h.clone(), h.clone(), q(1), q(0)),
        Point4::new(h.clone(), h.clone(), q(-1), q(1)),
        Point4::new(h.clone(), h, q(-1), q(-1)),
    )
    .unwrap();
    let rep = tri_tri_query(std::slice::from_ref(&t1), std::slice::from_ref(&t2), QueryMode::Report);
    assert_eq!(rep.count, 1);
    assert_eq!(rep.pairs[0].witness, Point4::new(qr(1, 2), qr(1, 2), q(0), q(0)));

    let shift = |t: &Triangle4, d: i64| {
        let [a, b, c] = t.vertices().clone().map(|v| v.add_vec(&[q(d), q(d), q(0), q(0)]));
        Triangle4::new(a, b, c).unwrap()
    };
    let red = vec![t1.clone(), t2.clone()];
    let blue = vec![shift(&t1, 10), shift(&t2, 10)];
    assert_eq!(tri_tri_query(&red, &blue, QueryMode::Count).count, 0);
}

#[test]
fn tri_tri_matches_second_brute_force() {
    for seed in 10..13 {
        let (red, blue) = tri_scene(seed, 50);
        let rep = check_modes(|m| tri_tri_query(&red, &blue, m));
        let mut want = BTreeSet::new();
        for (i, a) in red.iter().enumerate() {
            for (j, b) in blue.iter().enumerate() {
                if tri_tri_point_oracle(a, b).expect("generic pair") {
                    want.insert((i, j));
                }
            }
        }
        assert_eq!(pair_set(&rep), want);
        assert!(want.len() > 10, "{}", want.len());
    }
}

#[test]
fn line_2flat_batch_cases() {
    let plane = [pt([0, 0, 0, 0]), pt([1, 0, 0, 0]), pt([0, 1, 0, 0])];
    let lines = vec![
        Segment4::new(pt([1, 2, 0, 0]), pt([1, 2, 1, 1])).unwrap(),
        Segment4::new(pt([0, 0, 0, 1]), pt([1, 0, 0, 1])).unwrap(),
        Segment4::new(pt([5, 7, 0, 0]), pt([6, 9, 0, 0])).unwrap(),
    ];
    let rep = check_modes(|m| line_2flat_query(&lines, std::slice::from_ref(&plane), m));
    assert_eq!(pair_set(&rep), BTreeSet::from([(0, 0), (2, 0)]));
    assert_eq!(rep.pairs[0].witness, pt([1, 2, 0, 0]));
    assert_eq!(rep.pairs[1].witness, pt([5, 7, 0, 0]));

    let mut r = rng(21);
    let lines: Vec<Segment4> = (0..30).map(|_| rand_segment(&mut r, 1000)).collect();
    let flats: Vec<[Point4; 3]> = (0..30).map(|_| std::array::from_fn(|_| rand_point(&mut r, 1000))).collect();
    assert_eq!(check_modes(|m| line_2flat_query(&lines, &flats, m)).count, 0);
}

#[test]
fn ray_shoot_examples() {
    let dir = [q(1), q(1), q(1), q(1)];
    let origin = pt([0, 0, 0, 0]);
    let far = Tetrahedron4::new(pt([9, 0, 0, 0]), pt([0, 9, 0, 0]), pt([0, 0, 9, 0]), pt([0, 0, 0, 9])).unwrap();
    assert_eq!(ray_shoot(&origin, &dir, &[far.clone(), simplex()]).unwrap(), Some((1, quarter())));
    let away = [q(-1), q(-1), q(-1), q(-1)];
    assert_eq!(ray_shoot(&origin, &away, &[far, simplex()]).unwrap(), None);
    assert!(matches!(ray_shoot(&origin, &[q(0), q(0), q(0), q(0)], &[simplex()]), Err(Error::OutOfRange(_))));
    // Same tetrahedron twice: the smaller index wins.
    assert_eq!(ray_shoot(&origin, &dir, &[simplex(), simplex()]).unwrap(), Some((0, quarter())));
}

/// Hit parameter of a ray against a tetrahedron it crosses transversally, by solving
/// `o + t d = sum l_i v_i`, `sum l_i = 1` as one 5x5 system.
fn hit_param(o: &Point4, d: &[ExactScalar; 4], t: &Tetrahedron4) -> Option<ExactScalar> {
    let v = t.vertices();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for c in 0..4 {
        let mut row = vec![-d[c].clone()];
        row.extend(v.iter().map(|p| p.coords()[c].clone()));
        a.push(row);
        b.push(o.coords()[c].clone());
    }
    a.push(vec![q(0), q(1), q(1), q(1), q(1)]);
    b.push(q(1));
    let x = gauss(a, b).expect("ray transversal to the hyperplane");
    (!x[0].is_negative() && x[1..].iter().all(|l| !l.is_negative())).then(|| x[0].clone())
}

#[test]
fn ray_shoot_returns_exhaustive_minimum() {
    let mut r = rng(22);
    let mut hits = 0;
    for _ in 0..40 {
        let tets: Vec<Tetrahedron4> = (0..12).map(|_| rand_local_tetra(&mut r, 200, 120)).collect();
        let o = rand_point(&mut r, 300);
        let k = r.gen_range(0..12);
        let target = rand_hull_point(&mut r, tets[k].vertices());
        let d: [ExactScalar; 4] = std::array::from_fn(|c| &target.coords()[c] - &o.coords()[c]);
        let best = tets
            .iter()
            .enumerate()
            .filter_map(|(i, t)| hit_param(&o, &d, t).map(|s| (s, i)))
            .min();
        let got = ray_shoot(&o, &d, &tets).unwrap();
        match best {
            Some((s, i)) => {
                let (gi, gp) = got.expect("ray hits");
                assert_eq!(gi, i);
                assert_eq!(gp, o.add_vec(&d.clone().map(|x| x * &s)));
                hits += 1;
            }
            None => assert_eq!(got, None),
        }
    }
    assert!(hits >= 40);
}

fn shear_tet(s: &Shear, t: &Tetrahedron4) -> Tetrahedron4 {
    let [a, b, c, d] = t.vertices().clone().map(|v| s.apply(&v));
    Tetrahedron4::new(a, b, c, d).unwrap()
}

#[test]
fn shear_leaves_reports_unchanged() {
    let (segs, tets) = seg_scene(30, 40, 40);
    let s = Shear::new(5);
    let ss: Vec<Segment4> = segs.iter().map(|e| Segment4::new(s.apply(e.a()), s.apply(e.b())).unwrap()).collect();
    let ts: Vec<Tetrahedron4> = tets.iter().map(|t| shear_tet(&s, t)).collect();
    let before = seg_tetra_query(&segs, &tets, QueryMode::Report);
    let after = seg_tetra_query(&ss, &ts, QueryMode::Report);
    assert_eq!(pair_set(&before), pair_set(&after));
    for (x, y) in before.pairs.iter().zip(&after.pairs) {
        assert_eq!(s.apply(&x.witness), y.witness);
    }

    let (red, blue) = tri_scene(31, 40);
    let sh = |v: &[Triangle4]| -> Vec<Triangle4> {
        v.iter().map(|t| { let [a, b, c] = t.vertices().clone().map(|p| s.apply(&p)); Triangle4::new(a, b, c).unwrap() }).collect()
    };
    assert_eq!(
        pair_set(&tri_tri_query(&red, &blue, QueryMode::Report)),
        pair_set(&tri_tri_query(&sh(&red), &sh(&blue), QueryMode::Report))
    );
}

#[test]
fn disjoint_scene_has_zero_k_counts() {
    let t: Vec<Tetrahedron4> = (0..5)
        .map(|k| {
            let o = 10 * k;
            Tetrahedron4::new(pt([o, 0, 0, 0]), pt([o + 1, 0, 0, 0]), pt([o, 1, 0, 1]), pt([o, 0, 1, 0])).unwrap()
        })
        .collect();
    let a = arrangement_k_counts(&t).unwrap();
    assert_eq!((a.counts.k2, a.counts.k3, a.counts.k4), (0, 0, 0));
    assert!(a.pairs.is_empty() && a.triples.is_empty() && a.vertices.is_empty());
}

/// Common point of several tetrahedra by a feasibility program over their barycentric weights.
fn common_point(ts: &[&Tetrahedron4]) -> bool {
    let k = ts.len();
    let cols = 4 * k;
    let mut e = Vec::new();
    let mut f = Vec::new();
    for i in 0..k {
        let mut row = vec![q(0); cols];
        row[4 * i..4 * i + 4].fill(q(1));
        e.push(row);
        f.push(q(1));
    }
    for i in 1..k {
        for c in 0..4 {
            let mut row = vec![q(0); cols];
            for v in 0..4 {
                row[v] = ts[0].vertices()[v].coords()[c].clone();
                row[4 * i + v] = -ts[i].vertices()[v].coords()[c].clone();
            }
            e.push(row);
            f.push(q(0));
        }
    }
    lp::first_vertex(&e, &f).is_some()
}

#[test]
fn k_counts_match_feasibility_programs() {
    let mut g = isect4d::scene::SceneGen::new(40, 30);
    let t: Vec<Tetrahedron4> = (0..12).map(|_| g.tetrahedron().unwrap()).collect();
    let a = arrangement_k_counts(&t).unwrap();
    let n = t.len();
    let mut pairs = Vec::new();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !common_point(&[&t[i], &t[j]]) {
                continue;
            }
            pairs.push(vec![i, j]);
            for k in j + 1..n {
                if common_point(&[&t[i], &t[j], &t[k]]) {
                    triples.push(vec![i, j, k]);
                }
            }
        }
    }
    let ids = |v: &[Entity]| v.iter().map(|e| e.tetrahedra.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&a.pairs), pairs);
    assert_eq!(ids(&a.triples), triples);
    assert_eq!(a.counts.k2, pairs.len() as u64);
    assert_eq!(a.counts.k3, triples.len() as u64);
    assert_eq!(a.counts.k4, a.vertices.len() as u64);
    assert_eq!(a.counts.by_kind.values().sum::<u64>(), a.counts.k4);
    assert!(!triples.is_empty());
    for v in &a.vertices {
        assert!(v.tetrahedra.iter().all(|&i| tetra_contains(&t[i], &v.point)));
        if v.kind == Some(VertexKind::Quad) {
            let q4: Vec<&Tetrahedron4> = v.tetrahedra.iter().map(|&i| &t[i]).collect();
            assert!(common_point(&q4));
        }
    }
}

fn arb_scene() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..12, 1usize..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modes_agree_and_relabeling_permutes((seed, n, m) in arb_scene()) {
        let (segs, tets) = seg_scene(seed, n, m);
        let base = check_modes(|md| seg_tetra_query(&segs, &tets, md));
        let rs: Vec<Segment4> = segs.iter().rev().cloned().collect();
        let rt: Vec<Tetrahedron4> = tets.iter().rev().cloned().collect();
        let back: BTreeSet<(usize, usize)> = pair_set(&seg_tetra_query(&rs, &rt, QueryMode::Report))
            .into_iter()
            .map(|(i, j)| (n - 1 - i, m - 1 - j))
            .collect();
        prop_assert_eq!(pair_set(&base), back);

        let (red, blue) = tri_scene(seed, n);
        let rep = check_modes(|md| tri_tri_query(&red, &blue, md));
        let swapped: BTreeSet<(usize, usize)> = pair_set(&tri_tri_query(&blue, &red, QueryMode::Report))
            .into_iter()
            .map(|(i, j)| (j, i))
            .collect();
        prop_assert_eq!(pair_set(&rep), swapped);
    }

    #[test]
    fn ray_hit_lies_on_the_ray_inside_the_tetrahedron(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tets: Vec<Tetrahedron4> = (0..6).map(|_| rand_local_tetra(&mut r, 100, 60)).collect();
        let o = rand_point(&mut r, 150);
        let d: [ExactScalar; 4] = std::array::from_fn(|_| q(r.gen_range(-5..=5)));
        prop_assume!(!d.iter().all(Zero::is_zero));
        let got = ray_shoot(&o, &d, &tets).unwrap();
        let params: Vec<Option<ExactScalar>> = tets.iter().map(|t| lp::ray_hull_min_t(&o, &d, t.vertices())).collect();
        prop_assert_eq!(got.is_some(), params.iter().any(Option::is_some));
        if let Some((i, p)) = got {
            prop_assert!(tetra_contains(&tets[i], &p));
            let c = (0..4).find(|&c| !d[c].is_zero()).unwrap();
            let s = (&p.coords()[c] - &o.coords()[c]) / &d[c];
            prop_assert_eq!(o.add_vec(&d.clone().map(|x| x * &s)), p);
            for (j, t) in params.iter().enumerate() {
                if let Some(t) = t {
                    prop_assert!(*t > s || (*t == s && j >= i));
                }
            }
        }
    }
}
