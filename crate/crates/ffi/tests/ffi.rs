use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use isect4d::oracle;
use isect4d::scene::{generate, SceneKind};
use isect4d::QueryMode;
use isect4d_ffi::*;

fn last_error() -> String {
    let p = isect4d_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scene(kind: Isect4dSceneKind, n: usize, range: i64, seed: u64) -> *mut Isect4dScene {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { isect4d_scene_generate(kind, n, range, seed, &mut s) }, Isect4dStatus::Ok);
    s
}

fn pairs(r: *const Isect4dReport) -> Vec<(usize, usize)> {
    let mut len = 0;
    unsafe {
        assert_eq!(isect4d_report_len(r, &mut len), Isect4dStatus::Ok);
        (0..len)
            .map(|i| {
                let (mut a, mut b) = (0, 0);
                assert_eq!(isect4d_report_pair(r, i, &mut a, &mut b), Isect4dStatus::Ok);
                (a, b)
            })
            .collect()
    }
}

fn count(r: *const Isect4dReport) -> u64 {
    let mut c = 0;
    assert_eq!(unsafe { isect4d_report_count(r, &mut c) }, Isect4dStatus::Ok);
    c
}

#[test]
fn scene_json_round_trip() {
    let s = scene(Isect4dSceneKind::Tetrahedra, 7, 20, 3);
    unsafe {
        let mut len = 0;
        assert_eq!(isect4d_scene_len(s, &mut len), Isect4dStatus::Ok);
        assert_eq!(len, 7);
        let mut text = ptr::null_mut();
        assert_eq!(isect4d_scene_to_json(s, &mut text), Isect4dStatus::Ok);
        let json = CStr::from_ptr(text).to_str().unwrap().to_owned();
        assert_eq!(json, generate(SceneKind::Tetrahedra, 7, 20, 3).unwrap().to_json());

        let mut back = ptr::null_mut();
        assert_eq!(isect4d_scene_from_json(text, &mut back), Isect4dStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(isect4d_scene_to_json(back, &mut again), Isect4dStatus::Ok);
        assert_eq!(CStr::from_ptr(again).to_str().unwrap(), json);
        isect4d_string_free(text);
        isect4d_string_free(again);
        isect4d_scene_free(back);
        isect4d_scene_free(s);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = CString::new("{\"version\": 1, \"kind\": \"SEGMENTS\", \"objects\": [[\"1\"]]}").unwrap();
        assert_eq!(isect4d_scene_from_json(bad.as_ptr(), &mut s), Isect4dStatus::Schema);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(isect4d_scene_from_json(ptr::null(), &mut s), Isect4dStatus::NullPointer);
        assert_eq!(isect4d_scene_len(ptr::null(), ptr::null_mut()), Isect4dStatus::NullPointer);
        let ok = CString::new(generate(SceneKind::Segments, 2, 5, 1).unwrap().to_json()).unwrap();
        assert_eq!(isect4d_scene_from_json(ok.as_ptr(), ptr::null_mut()), Isect4dStatus::NullPointer);

        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(isect4d_scene_from_json(invalid.as_ptr().cast(), &mut s), Isect4dStatus::InvalidUtf8);

        let tets = scene(Isect4dSceneKind::Tetrahedra, 5, 10, 2);
        let mut st = ptr::null_mut();
        assert_eq!(isect4d_structure_build(tets, Isect4dSetup::SegTetra, 7.0, 0, &mut st), Isect4dStatus::OutOfRange);
        assert!(last_error().contains("n^6") || last_error().contains("range"));
        assert_eq!(isect4d_structure_build(tets, Isect4dSetup::TriTri, 2.0, 0, &mut st), Isect4dStatus::Schema);
        assert!(st.is_null());

        let mut r = ptr::null_mut();
        assert_eq!(isect4d_ccd_detect(tets, Isect4dMode::Report, 0, 0, &mut r), Isect4dStatus::Schema);
        isect4d_scene_free(tets);

        isect4d_scene_free(ptr::null_mut());
        isect4d_structure_free(ptr::null_mut());
        isect4d_report_free(ptr::null_mut());
        isect4d_string_free(ptr::null_mut());
    }
}

#[test]
fn structure_matches_oracle_for_every_setup() {
    let cases = [
        (Isect4dSetup::SegTetra, Isect4dSceneKind::Tetrahedra, Isect4dSceneKind::Segments),
        (Isect4dSetup::TriTri, Isect4dSceneKind::Triangles, Isect4dSceneKind::Triangles),
        (Isect4dSetup::TetraSeg, Isect4dSceneKind::Segments, Isect4dSceneKind::Tetrahedra),
        (Isect4dSetup::LineFlat, Isect4dSceneKind::FlatsAndLines, Isect4dSceneKind::FlatsAndLines),
    ];
    for (i, (setup, input_kind, query_kind)) in cases.into_iter().enumerate() {
        let input = scene(input_kind, 16, 12, 10 + i as u64);
        let queries = scene(query_kind, 10, 12, 20 + i as u64);
        for sigma in [1.0, 2.5, 6.0] {
            unsafe {
                let mut st = ptr::null_mut();
                assert_eq!(isect4d_structure_build(input, setup, sigma, 5, &mut st), Isect4dStatus::Ok, "{}", last_error());
                let mut b = Isect4dBuildStats::default();
                assert_eq!(isect4d_structure_stats(st, &mut b), Isect4dStatus::Ok);
                assert!(b.nodes >= 1);
                for mode in [Isect4dMode::Detect, Isect4dMode::Count, Isect4dMode::Report] {
                    let (mut got, mut want) = (ptr::null_mut(), ptr::null_mut());
                    assert_eq!(isect4d_structure_query(st, queries, mode, &mut got), Isect4dStatus::Ok);
                    assert_eq!(isect4d_oracle_query(input, queries, setup, mode, &mut want), Isect4dStatus::Ok);
                    assert_eq!(count(got), count(want), "{setup:?} sigma {sigma} {mode:?}");
                    let (mut dg, mut dw) = (false, false);
                    isect4d_report_detected(got, &mut dg);
                    isect4d_report_detected(want, &mut dw);
                    assert_eq!(dg, dw);
                    let mut pg = pairs(got);
                    pg.sort_unstable();
                    assert_eq!(pg, pairs(want));
                    isect4d_report_free(got);
                    isect4d_report_free(want);
                }
                isect4d_structure_free(st);
            }
        }
        unsafe {
            isect4d_scene_free(input);
            isect4d_scene_free(queries);
        }
    }
}

#[test]
fn single_queries_and_witnesses() {
    let input = scene(Isect4dSceneKind::Tetrahedra, 12, 6, 4);
    let queries = scene(Isect4dSceneKind::Segments, 8, 6, 5);
    let file = generate(SceneKind::Segments, 8, 6, 5).unwrap();
    let segs = file.segments().unwrap();
    let tets = generate(SceneKind::Tetrahedra, 12, 6, 4).unwrap().tetrahedra().unwrap();
    unsafe {
        let mut st = ptr::null_mut();
        assert_eq!(isect4d_structure_build(input, Isect4dSetup::SegTetra, 2.0, 1, &mut st), Isect4dStatus::Ok);
        let mut total = 0;
        for q in 0..segs.len() {
            let mut r = ptr::null_mut();
            assert_eq!(isect4d_structure_query_one(st, queries, q, Isect4dMode::Report, &mut r), Isect4dStatus::Ok);
            let want = oracle::seg_tetra_query(&segs[q..=q], &tets, QueryMode::Report);
            let got: Vec<usize> = pairs(r).into_iter().map(|(_, b)| b).collect();
            let mut got_sorted = got.clone();
            got_sorted.sort_unstable();
            assert_eq!(got_sorted, want.pairs.iter().map(|h| h.b).collect::<Vec<_>>());
            for (i, b) in got.iter().enumerate() {
                let mut xyzw = [f64::NAN; 4];
                assert_eq!(isect4d_report_witness(r, i, xyzw.as_mut_ptr()), Isect4dStatus::Ok);
                assert!(want.pairs.iter().any(|h| h.b == *b));
                let (pa, pb) = (segs[q].a().to_f64(), segs[q].b().to_f64());
                for k in 0..4 {
                    let (lo, hi) = (pa[k].min(pb[k]), pa[k].max(pb[k]));
                    assert!(xyzw[k] >= lo - 1e-9 && xyzw[k] <= hi + 1e-9, "witness off the query segment");
                }
            }
            let mut s = Isect4dQueryStats::default();
            assert_eq!(isect4d_report_stats(r, &mut s), Isect4dStatus::Ok);
            assert!(s.nodes_visited >= 1);
            total += got.len();
            isect4d_report_free(r);
        }
        let mut r = ptr::null_mut();
        assert_eq!(isect4d_structure_query_one(st, queries, 99, Isect4dMode::Count, &mut r), Isect4dStatus::OutOfRange);
        assert!(r.is_null());
        let mut all = ptr::null_mut();
        assert_eq!(isect4d_structure_query(st, queries, Isect4dMode::Count, &mut all), Isect4dStatus::Ok);
        assert_eq!(count(all) as usize, total);
        let (mut a, mut b) = (0, 0);
        assert_eq!(isect4d_report_pair(all, 0, &mut a, &mut b), Isect4dStatus::OutOfRange);
        isect4d_report_free(all);
        isect4d_structure_free(st);
        isect4d_scene_free(input);
        isect4d_scene_free(queries);
    }
}

#[test]
fn report_json_is_exact() {
    let input = scene(Isect4dSceneKind::Triangles, 10, 5, 8);
    let queries = scene(Isect4dSceneKind::Triangles, 10, 5, 9);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(isect4d_oracle_query(input, queries, Isect4dSetup::TriTri, Isect4dMode::Report, &mut r), Isect4dStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(isect4d_report_to_json(r, &mut text), Isect4dStatus::Ok);
        let json: serde_json::Value = serde_json::from_str(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        let red = generate(SceneKind::Triangles, 10, 5, 9).unwrap().triangles().unwrap();
        let blue = generate(SceneKind::Triangles, 10, 5, 8).unwrap().triangles().unwrap();
        let want = oracle::tri_tri_query(&red, &blue, QueryMode::Report);
        assert_eq!(json, serde_json::to_value(&want).unwrap());
        isect4d_string_free(text);
        isect4d_report_free(r);
        isect4d_scene_free(input);
        isect4d_scene_free(queries);
    }
}

#[test]
fn ccd_and_arrangement() {
    let moving = scene(Isect4dSceneKind::MovingTetrahedra, 12, 10, 6);
    let tets = scene(Isect4dSceneKind::Tetrahedra, 8, 10, 6);
    unsafe {
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(isect4d_ccd_detect(moving, Isect4dMode::Report, 0, 0, &mut a), Isect4dStatus::Ok);
        assert_eq!(isect4d_ccd_detect(moving, Isect4dMode::Report, 3, 9, &mut b), Isect4dStatus::Ok);
        assert_eq!(pairs(a), pairs(b));
        let mt = generate(SceneKind::MovingTetrahedra, 12, 10, 6).unwrap().moving_tetrahedra().unwrap();
        let want = isect4d::ccd::detect_collisions_oracle(&mt, QueryMode::Count);
        assert_eq!(count(a), want.count);
        isect4d_report_free(a);
        isect4d_report_free(b);

        let mut k = Isect4dKCounts::default();
        assert_eq!(isect4d_arrangement_counts(tets, &mut k), Isect4dStatus::Ok);
        let t = generate(SceneKind::Tetrahedra, 8, 10, 6).unwrap().tetrahedra().unwrap();
        let c = oracle::arrangement_k_counts(&t).unwrap().counts;
        assert_eq!((k.k2, k.k3, k.k4), (c.k2, c.k3, c.k4));
        isect4d_scene_free(moving);
        isect4d_scene_free(tets);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(isect4d_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "isect4d.h"

int main(void) {
    Isect4dScene *input = NULL, *queries = NULL;
    Isect4dStructure *st = NULL;
    Isect4dReport *r = NULL;
    uint64_t n = 0;
    if (isect4d_scene_generate(ISECT4D_SCENE_KIND_TETRAHEDRA, 10, 8, 1, &input) != ISECT4D_STATUS_OK) return 10;
    if (isect4d_scene_generate(ISECT4D_SCENE_KIND_SEGMENTS, 10, 8, 2, &queries) != ISECT4D_STATUS_OK) return 11;
    if (isect4d_structure_build(input, ISECT4D_SETUP_SEG_TETRA, 2.0, 0, &st) != ISECT4D_STATUS_OK) return 12;
    if (isect4d_structure_query(st, queries, ISECT4D_MODE_COUNT, &r) != ISECT4D_STATUS_OK) return 13;
    if (isect4d_report_count(r, &n) != ISECT4D_STATUS_OK) return 14;
    if (isect4d_structure_build(input, ISECT4D_SETUP_SEG_TETRA, 9.0, 0, &st) != ISECT4D_STATUS_OUT_OF_RANGE) return 15;
    if (isect4d_last_error() == NULL) return 16;
    printf("%llu\n", (unsigned long long)n);
    isect4d_report_free(r);
    isect4d_structure_free(st);
    isect4d_scene_free(queries);
    isect4d_scene_free(input);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("isect4d.h").exists());
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libisect4d_ffi.a");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(&src, C_PROGRAM).unwrap();

    let syntax = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&include).arg(&src).status();
    let Ok(syntax) = syntax else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(syntax.success());
    if !lib.exists() {
        eprintln!("{} not built; header checked only", lib.display());
        return;
    }
    let exe = tmp.path().join("smoke");
    let ok = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(ok.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());

    let tets = generate(SceneKind::Tetrahedra, 10, 8, 1).unwrap().tetrahedra().unwrap();
    let segs = generate(SceneKind::Segments, 10, 8, 2).unwrap().segments().unwrap();
    let want = oracle::seg_tetra_query(&segs, &tets, QueryMode::Count).count;
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), want.to_string());
}
