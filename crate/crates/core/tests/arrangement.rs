mod common;

use std::collections::BTreeSet;

use common::{pt, rng};
use isect4d::arrangement::*;
use isect4d::kernel::{q, qr, tetra_contains, Point4, Tetrahedron4};
use isect4d::oracle::{arrangement_k_counts, VertexKind};
use isect4d::scene::SceneGen;
use isect4d::Error;
use rand::Rng;

fn simplex() -> Tetrahedron4 {
    Tetrahedron4::new(pt([1, 0, 0, 0]), pt([0, 1, 0, 0]), pt([0, 0, 1, 0]), pt([0, 0, 0, 1])).unwrap()
}

fn scene(seed: u64, n: usize, range: i64) -> Vec<Tetrahedron4> {
    let mut g = SceneGen::new(seed, range);
    (0..n).map(|_| g.tetrahedron().unwrap()).collect()
}

fn ids(v: &[isect4d::oracle::Entity]) -> Vec<Vec<usize>> {
    v.iter().map(|e| e.tetrahedra.clone()).collect()
}

#[test]
fn disjoint_scene_is_empty() {
    let t: Vec<Tetrahedron4> = (0..6)
        .map(|k| {
            let o = 10 * k;
            Tetrahedron4::new(pt([0, 0, o, 0]), pt([1, 0, o, 0]), pt([0, 1, o, 0]), pt([0, 0, o + 1, 1])).unwrap()
        })
        .collect();
    assert!(pairwise(&t).unwrap().is_empty());
    let k = k_counts(&t).unwrap();
    assert_eq!((k.k2, k.k3, k.k4), (0, 0, 0));
    assert_eq!(intersection_polygon(&t, 0, 1), Err(Error::EmptyIntersection));
}

#[test]
fn pair_set_matches_oracle_with_member_witnesses() {
    for seed in 0..3 {
        let t = scene(seed, 20, 1000);
        let want = arrangement_k_counts(&t).unwrap();
        let got = pairwise(&t).unwrap();
        let pairs: Vec<Vec<usize>> = got.iter().map(|w| vec![w.pair.0, w.pair.1]).collect();
        assert_eq!(pairs, ids(&want.pairs));
        for w in &got {
            assert!(tetra_contains(&t[w.pair.0], &w.vertex) && tetra_contains(&t[w.pair.1], &w.vertex));
            assert!(matches!(w.kind, VertexKind::EdgeTetra | VertexKind::FaceFace));
        }
    }
}

#[test]
fn polygons_are_convex_and_shared() {
    let mut seen = 0;
    for seed in 0..4 {
        let t = scene(seed, 15, 1000);
        for w in pairwise(&t).unwrap() {
            let poly = intersection_polygon(&t, w.pair.0, w.pair.1).unwrap();
            assert!((3..=8).contains(&poly.vertices.len()), "{}", poly.vertices.len());
            for v in &poly.vertices {
                for &k in &[w.pair.0, w.pair.1] {
                    assert!(tetra_contains(&t[k], &v.point));
                    assert!(num_traits::Zero::is_zero(&t[k].hyperplane().eval(&v.point)));
                }
            }
            assert!(poly.points().contains(&w.vertex));
            seen += 1;
        }
    }
    assert!(seen > 40, "{seen}");
}

#[test]
fn single_touching_point_is_degenerate() {
    // The second tetrahedron touches the first only at its apex (1/4, 1/4, 1/4, 1/4).
    let a = simplex();
    let apex = Point4::new(qr(1, 4), qr(1, 4), qr(1, 4), qr(1, 4));
    let b = Tetrahedron4::new(apex, pt([2, 2, 2, 3]), pt([3, 2, 2, 2]), pt([2, 3, 2, 1])).unwrap();
    assert_eq!(intersection_polygon(&[a, b], 0, 1), Err(Error::DegeneratePosition));
}

#[test]
fn chart_round_trip() {
    let mut r = rng(3);
    for t in scene(4, 20, 100) {
        let chart = Chart3::new(&t);
        for _ in 0..5 {
            let w: Vec<i64> = (0..4).map(|_| r.gen_range(-3..=5)).collect();
            let tot: i64 = w.iter().sum();
            if tot == 0 {
                continue;
            }
            // Affine combinations of the vertices stay on the hyperplane.
            let p = Point4::from_array(std::array::from_fn(|c| {
                (0..4).map(|k| &t.vertices()[k].coords()[c] * q(w[k])).sum::<isect4d::kernel::ExactScalar>() / q(tot)
            }));
            assert_eq!(chart.lift(&chart.project(&p)), p);
        }
    }
}

#[test]
fn single_neighbour_gives_no_triples() {
    let t = scene(1, 20, 1000);
    let w = &pairwise(&t).unwrap()[0];
    let poly = intersection_polygon(&t, w.pair.0, w.pair.1).unwrap();
    let (tr, qu) = per_tetra_reduction(&t[w.pair.0], &[(w.pair.1, poly.points())]).unwrap();
    assert!(tr.is_empty() && qu.is_empty());
}

#[test]
fn local_reductions_recover_oracle_triples_and_quadruples() {
    for seed in 0..3 {
        let t = scene(10 + seed, 15, 30);
        let want = arrangement_k_counts(&t).unwrap();
        let mut local = vec![Vec::new(); t.len()];
        for w in pairwise(&t).unwrap() {
            let poly = intersection_polygon(&t, w.pair.0, w.pair.1).unwrap();
            local[w.pair.0].push((w.pair.1, poly.points()));
            local[w.pair.1].push((w.pair.0, poly.points()));
        }
        let mut triples = BTreeSet::new();
        let mut ends = BTreeSet::new();
        let mut quads = BTreeSet::new();
        for (k, nb) in local.iter().enumerate() {
            let (tr, qu) = per_tetra_reduction(&t[k], nb).unwrap();
            for x in tr {
                let mut id = vec![k, x.others[0], x.others[1]];
                id.sort();
                for e in &x.ends {
                    assert!(id.iter().all(|&i| tetra_contains(&t[i], e)));
                }
                triples.insert(id);
                ends.extend(x.ends);
            }
            for x in qu {
                let mut id = vec![k, x.others[0], x.others[1], x.others[2]];
                id.sort();
                assert!(id.iter().all(|&i| tetra_contains(&t[i], &x.point)));
                quads.insert((id, x.point));
            }
        }
        let want_triples: BTreeSet<Vec<usize>> = ids(&want.triples).into_iter().collect();
        assert_eq!(triples, want_triples);
        let of_kind = |k: VertexKind| -> BTreeSet<Point4> {
            want.vertices.iter().filter(|v| v.kind == Some(k)).map(|v| v.point.clone()).collect()
        };
        assert_eq!(ends, of_kind(VertexKind::FaceTetraTetra));
        let qp: BTreeSet<Point4> = quads.into_iter().map(|(_, p)| p).collect();
        assert_eq!(qp, of_kind(VertexKind::Quad));
    }
}

#[test]
fn enumeration_matches_exhaustive_subsets() {
    let mut quads = 0;
    for (seed, n, range) in [(0, 20, 1000), (1, 20, 1000), (2, 25, 30), (3, 12, 10)] {
        let t = scene(seed, n, range);
        let want = arrangement_k_counts(&t).unwrap();
        let got = enumerate(&t).unwrap();
        assert_eq!(got.counts, want.counts, "seed {seed}");
        assert_eq!(ids(&got.pairs), ids(&want.pairs));
        assert_eq!(ids(&got.triples), ids(&want.triples));
        assert_eq!(got.vertices, want.vertices);
        for e in got.pairs.iter().chain(&got.triples).chain(&got.vertices) {
            assert!(e.tetrahedra.iter().all(|&i| tetra_contains(&t[i], &e.point)));
        }
        quads += got.counts.by_kind.get("QUAD").copied().unwrap_or(0);
    }
    assert!(quads > 0);
}

#[test]
fn count_relations() {
    for seed in 0..4 {
        let k = k_counts(&scene(20 + seed, 18, 60)).unwrap();
        let kind = |s: &str| k.by_kind.get(s).copied().unwrap_or(0);
        assert!(k.k4 >= k.k3);
        // Every common segment of a triple ends on a 2-face of one of the three.
        assert_eq!(kind("FACE_TETRA_TETRA"), 2 * k.k3);
        // Each intersection polygon has at least three vertices of its own.
        assert!(kind("EDGE_TETRA") + kind("FACE_FACE") >= 3 * k.k2);
    }
}

#[test]
fn pair_without_third_has_no_triple() {
    let t = scene(0, 20, 1000);
    let w = &pairwise(&t).unwrap()[0];
    let two = vec![t[w.pair.0].clone(), t[w.pair.1].clone()];
    let k = k_counts(&two).unwrap();
    assert_eq!((k.k2, k.k3), (1, 0));
    assert!(k.k4 >= 3);
}

#[test]
fn counts_grow_with_the_scene() {
    let t = scene(7, 16, 60);
    let mut prev = (0, 0, 0);
    for n in 1..=t.len() {
        let k = k_counts(&t[..n]).unwrap();
        let cur = (k.k2, k.k3, k.k4);
        assert!(cur.0 >= prev.0 && cur.1 >= prev.1 && cur.2 >= prev.2);
        prev = cur;
    }
    assert!(prev.0 > 0);
}

#[test]
fn coplanar_pair_is_rejected() {
    let a = simplex();
    let b = Tetrahedron4::new(pt([1, 0, 0, 0]), pt([0, 1, 0, 0]), pt([0, 0, 1, 0]), Point4::new(qr(1, 2), q(0), q(0), qr(1, 2))).unwrap();
    assert_eq!(k_counts(&[a, b]).map(|k| k.k2), Err(Error::DegeneratePosition));
}
