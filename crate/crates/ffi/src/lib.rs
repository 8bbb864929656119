//! C ABI over `isect4d`.
//!
//! Every fallible call returns an [`Isect4dStatus`]. On failure a message is kept
//! per thread and can be read with [`isect4d_last_error`]. Handles are opaque and
//! must be released with the matching `*_free` function; strings returned through
//! `char **` out-parameters are released with [`isect4d_string_free`].
//!
//! Handle arguments must be live handles from this library, strings must be
//! NUL-terminated, and out-pointers must be writable. NULL is reported as
//! `NullPointer` rather than dereferenced.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use isect4d::arrangement;
use isect4d::ccd::{detect_collisions_with, CcdOptions};
use isect4d::kernel::Segment4;
use isect4d::oracle;
use isect4d::rangetree::{MultiLevelStructure, QueryObject, QueryStats, SceneObjects, Setup, StorageBudget};
use isect4d::scene::{self, SceneFile, SceneKind};
use isect4d::{Error, IntersectionReport, QueryMode};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Isect4dStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    InvalidObject = 4,
    Degenerate = 5,
    OutOfRange = 6,
    SetupMismatch = 7,
    RetriesExhausted = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Isect4dMode {
    Detect = 0,
    Count = 1,
    Report = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Isect4dSetup {
    /// Segment queries against stored tetrahedra.
    SegTetra = 0,
    TriTri = 1,
    /// Tetrahedron queries against stored segments.
    TetraSeg = 2,
    /// Line queries against stored 2-flats.
    LineFlat = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Isect4dSceneKind {
    Segments = 0,
    Triangles = 1,
    Tetrahedra = 2,
    MovingTetrahedra = 3,
    FlatsAndLines = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Isect4dBuildStats {
    pub nodes: u64,
    pub stored_items: u64,
    pub max_leaf: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Isect4dQueryStats {
    pub nodes_visited: u64,
    pub canonical_sets_touched: u64,
    pub leaf_items_scanned: u64,
    pub exact_predicate_calls: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Isect4dKCounts {
    pub k2: u64,
    pub k3: u64,
    pub k4: u64,
}

/// A validated scene file.
pub struct Isect4dScene {
    file: SceneFile,
}

/// A multilevel range structure over one scene.
pub struct Isect4dStructure {
    inner: MultiLevelStructure,
}

/// Answer of a query batch, with traversal counters when produced by a structure.
pub struct Isect4dReport {
    report: IntersectionReport,
    stats: QueryStats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(Isect4dStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let status = match &e {
            Error::Schema(_) => Isect4dStatus::Schema,
            Error::InvalidObject(_) | Error::Contained | Error::EmptyIntersection => Isect4dStatus::InvalidObject,
            Error::DegenerateTetrahedron | Error::DegenerateDirection | Error::DegeneratePosition => Isect4dStatus::Degenerate,
            Error::OutOfRange(_) | Error::BudgetOutOfRange { .. } => Isect4dStatus::OutOfRange,
            Error::RetriesExhausted(_) => Isect4dStatus::RetriesExhausted,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(Isect4dStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> Isect4dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Isect4dStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            Isect4dStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Fail(Isect4dStatus::InvalidUtf8, e.to_string()))
}

fn owned_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|e| Fail(Isect4dStatus::Schema, e.to_string()))
}

fn mode(m: Isect4dMode) -> QueryMode {
    match m {
        Isect4dMode::Detect => QueryMode::Detect,
        Isect4dMode::Count => QueryMode::Count,
        Isect4dMode::Report => QueryMode::Report,
    }
}

fn setup(s: Isect4dSetup) -> Setup {
    match s {
        Isect4dSetup::SegTetra => Setup::SegQueryTetraInput,
        Isect4dSetup::TriTri => Setup::TriTri,
        Isect4dSetup::TetraSeg => Setup::TetraQuerySegInput,
        Isect4dSetup::LineFlat => Setup::Line2Flat,
    }
}

fn input_objects(s: Setup, f: &SceneFile) -> Result<SceneObjects, Fail> {
    Ok(match s {
        Setup::SegQueryTetraInput => SceneObjects::Tetrahedra(f.tetrahedra()?),
        Setup::TriTri => SceneObjects::Triangles(f.triangles()?),
        Setup::TetraQuerySegInput => SceneObjects::Segments(f.segments()?),
        Setup::Line2Flat => SceneObjects::Flats(f.flats_and_lines()?.0),
    })
}

fn query_lines(f: &SceneFile) -> Result<Vec<Segment4>, Fail> {
    Ok(match f.kind {
        SceneKind::FlatsAndLines => f.flats_and_lines()?.1,
        _ => f.segments()?,
    })
}

unsafe fn put_box<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

unsafe fn put_report(out: *mut *mut Isect4dReport, report: IntersectionReport, stats: QueryStats) -> Result<(), Fail> {
    put_box(out, Isect4dReport { report, stats })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isect4d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn isect4d_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a scene document.
#[no_mangle]
pub unsafe extern "C" fn isect4d_scene_from_json(json: *const c_char, out: *mut *mut Isect4dScene) -> Isect4dStatus {
    guard(|| {
        let file = SceneFile::from_json(text(json)?)?;
        put_box(out, Isect4dScene { file })
    })
}

/// Generates a random scene with integer coordinates in `[-range, range]`.
#[no_mangle]
pub unsafe extern "C" fn isect4d_scene_generate(
    kind: Isect4dSceneKind,
    n: usize,
    range: i64,
    seed: u64,
    out: *mut *mut Isect4dScene,
) -> Isect4dStatus {
    guard(|| {
        let kind = match kind {
            Isect4dSceneKind::Segments => SceneKind::Segments,
            Isect4dSceneKind::Triangles => SceneKind::Triangles,
            Isect4dSceneKind::Tetrahedra => SceneKind::Tetrahedra,
            Isect4dSceneKind::MovingTetrahedra => SceneKind::MovingTetrahedra,
            Isect4dSceneKind::FlatsAndLines => SceneKind::FlatsAndLines,
        };
        let file = scene::generate(kind, n, range, seed)?;
        put_box(out, Isect4dScene { file })
    })
}

/// Number of object records in the scene.
#[no_mangle]
pub unsafe extern "C" fn isect4d_scene_len(scene: *const Isect4dScene, out: *mut usize) -> Isect4dStatus {
    guard(|| put(out, borrow(scene, "scene")?.file.objects.len()))
}

/// Serialises the scene; free the result with `isect4d_string_free`.
#[no_mangle]
pub unsafe extern "C" fn isect4d_scene_to_json(scene: *const Isect4dScene, out: *mut *mut c_char) -> Isect4dStatus {
    guard(|| {
        let s = owned_string(borrow(scene, "scene")?.file.to_json())?;
        put(out, s)
    })
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_scene_free(scene: *mut Isect4dScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Builds a range structure over the input objects of `setup` with storage `n^sigma`.
///
/// For `LineFlat` the flats of a flats-and-lines scene are stored.
#[no_mangle]
pub unsafe extern "C" fn isect4d_structure_build(
    input: *const Isect4dScene,
    kind: Isect4dSetup,
    sigma: f64,
    seed: u64,
    out: *mut *mut Isect4dStructure,
) -> Isect4dStatus {
    guard(|| {
        let s = setup(kind);
        let objects = input_objects(s, &borrow(input, "input")?.file)?;
        let n = match &objects {
            SceneObjects::Segments(v) => v.len(),
            SceneObjects::Triangles(v) => v.len(),
            SceneObjects::Tetrahedra(v) => v.len(),
            SceneObjects::Flats(v) => v.len(),
        };
        let budget = StorageBudget::from_sigma(n as u64, sigma)?;
        let inner = MultiLevelStructure::build(&objects, s, budget, seed)?;
        put_box(out, Isect4dStructure { inner })
    })
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_structure_stats(structure: *const Isect4dStructure, out: *mut Isect4dBuildStats) -> Isect4dStatus {
    guard(|| {
        let b = borrow(structure, "structure")?.inner.build_stats();
        put(out, Isect4dBuildStats { nodes: b.nodes, stored_items: b.stored_items, max_leaf: b.max_leaf })
    })
}

/// Runs every object of `queries` against the structure as one batch.
///
/// Hits are `(query index, input index)` pairs.
#[no_mangle]
pub unsafe extern "C" fn isect4d_structure_query(
    structure: *const Isect4dStructure,
    queries: *const Isect4dScene,
    m: Isect4dMode,
    out: *mut *mut Isect4dReport,
) -> Isect4dStatus {
    guard(|| {
        let st = &borrow(structure, "structure")?.inner;
        let q = &borrow(queries, "queries")?.file;
        let m = mode(m);
        let (report, stats) = match st {
            MultiLevelStructure::SegQueryTetraInput(s) => s.query_batch(&q.segments()?, m),
            MultiLevelStructure::TriTri(s) => s.query_batch(&q.triangles()?, m),
            MultiLevelStructure::TetraQuerySegInput(s) => s.query_batch(&q.tetrahedra()?, m),
            MultiLevelStructure::Line2Flat(s) => s.query_batch(&query_lines(q)?, m),
        };
        put_report(out, report, stats)
    })
}

/// Runs a single query object (record `index` of `queries`).
#[no_mangle]
pub unsafe extern "C" fn isect4d_structure_query_one(
    structure: *const Isect4dStructure,
    queries: *const Isect4dScene,
    index: usize,
    m: Isect4dMode,
    out: *mut *mut Isect4dReport,
) -> Isect4dStatus {
    guard(|| {
        let st = &borrow(structure, "structure")?.inner;
        let q = &borrow(queries, "queries")?.file;
        let oob = || Fail(Isect4dStatus::OutOfRange, format!("query index {index} out of range"));
        let m = mode(m);
        let (report, stats) = match st.setup() {
            Setup::SegQueryTetraInput => st.query(QueryObject::Segment(q.segments()?.get(index).ok_or_else(oob)?), m),
            Setup::TriTri => st.query(QueryObject::Triangle(q.triangles()?.get(index).ok_or_else(oob)?), m),
            Setup::TetraQuerySegInput => st.query(QueryObject::Tetrahedron(q.tetrahedra()?.get(index).ok_or_else(oob)?), m),
            Setup::Line2Flat => st.query(QueryObject::Segment(query_lines(q)?.get(index).ok_or_else(oob)?), m),
        }
        .map_err(|e| Fail(Isect4dStatus::SetupMismatch, e.to_string()))?;
        put_report(out, report, stats)
    })
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_structure_free(structure: *mut Isect4dStructure) {
    if !structure.is_null() {
        drop(Box::from_raw(structure));
    }
}

/// Exhaustive answer for the same batch as `isect4d_structure_query`.
#[no_mangle]
pub unsafe extern "C" fn isect4d_oracle_query(
    input: *const Isect4dScene,
    queries: *const Isect4dScene,
    kind: Isect4dSetup,
    m: Isect4dMode,
    out: *mut *mut Isect4dReport,
) -> Isect4dStatus {
    guard(|| {
        let s = setup(kind);
        let objects = input_objects(s, &borrow(input, "input")?.file)?;
        let q = &borrow(queries, "queries")?.file;
        let m = mode(m);
        let report = match objects {
            SceneObjects::Tetrahedra(t) => oracle::seg_tetra_query(&q.segments()?, &t, m),
            SceneObjects::Triangles(t) => oracle::tri_tri_query(&q.triangles()?, &t, m),
            SceneObjects::Segments(e) => oracle::tetra_seg_query(&q.tetrahedra()?, &e, m),
            SceneObjects::Flats(f) => oracle::line_2flat_query(&query_lines(q)?, &f, m),
        };
        put_report(out, report, QueryStats::default())
    })
}

/// Collisions among the moving tetrahedra of a scene.
///
/// A `threshold` of 0 selects the default.
#[no_mangle]
pub unsafe extern "C" fn isect4d_ccd_detect(
    scene: *const Isect4dScene,
    m: Isect4dMode,
    threshold: usize,
    seed: u64,
    out: *mut *mut Isect4dReport,
) -> Isect4dStatus {
    guard(|| {
        let tets = borrow(scene, "scene")?.file.moving_tetrahedra()?;
        let mut opts = CcdOptions { seed, ..CcdOptions::default() };
        if threshold > 0 {
            opts.threshold = threshold;
        }
        put_report(out, detect_collisions_with(&tets, mode(m), opts), QueryStats::default())
    })
}

/// Arrangement entity counts of a tetrahedra scene.
#[no_mangle]
pub unsafe extern "C" fn isect4d_arrangement_counts(scene: *const Isect4dScene, out: *mut Isect4dKCounts) -> Isect4dStatus {
    guard(|| {
        let tets = borrow(scene, "scene")?.file.tetrahedra()?;
        let c = arrangement::enumerate(&tets)?.counts;
        put(out, Isect4dKCounts { k2: c.k2, k3: c.k3, k4: c.k4 })
    })
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_report_detected(report: *const Isect4dReport, out: *mut bool) -> Isect4dStatus {
    guard(|| put(out, borrow(report, "report")?.report.detected))
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_report_count(report: *const Isect4dReport, out: *mut u64) -> Isect4dStatus {
    guard(|| put(out, borrow(report, "report")?.report.count))
}

/// Number of listed pairs (zero unless the query ran in report mode).
#[no_mangle]
pub unsafe extern "C" fn isect4d_report_len(report: *const Isect4dReport, out: *mut usize) -> Isect4dStatus {
    guard(|| put(out, borrow(report, "report")?.report.pairs.len()))
}

/// Indices of pair `i`.
#[no_mangle]
pub unsafe extern "C" fn isect4d_report_pair(report: *const Isect4dReport, i: usize, a: *mut usize, b: *mut usize) -> Isect4dStatus {
    guard(|| {
        let r = &borrow(report, "report")?.report;
        let hit = r.pairs.get(i).ok_or_else(|| Fail(Isect4dStatus::OutOfRange, format!("pair {i} of {}", r.pairs.len())))?;
        put(a, hit.a)?;
        put(b, hit.b)
    })
}

/// Floating-point approximation of the witness of pair `i`.
#[no_mangle]
pub unsafe extern "C" fn isect4d_report_witness(report: *const Isect4dReport, i: usize, xyzw: *mut f64) -> Isect4dStatus {
    guard(|| {
        let r = &borrow(report, "report")?.report;
        let hit = r.pairs.get(i).ok_or_else(|| Fail(Isect4dStatus::OutOfRange, format!("pair {i} of {}", r.pairs.len())))?;
        if xyzw.is_null() {
            return Err(null("xyzw"));
        }
        ptr::copy_nonoverlapping(hit.witness.to_f64().as_ptr(), xyzw, 4);
        Ok(())
    })
}

/// Traversal counters; all zero for oracle and collision reports.
#[no_mangle]
pub unsafe extern "C" fn isect4d_report_stats(report: *const Isect4dReport, out: *mut Isect4dQueryStats) -> Isect4dStatus {
    guard(|| {
        let s = &borrow(report, "report")?.stats;
        put(
            out,
            Isect4dQueryStats {
                nodes_visited: s.nodes_visited,
                canonical_sets_touched: s.canonical_sets_touched,
                leaf_items_scanned: s.leaf_items_scanned,
                exact_predicate_calls: s.exact_predicate_calls,
            },
        )
    })
}

/// Report as JSON with exact rational witnesses; free with `isect4d_string_free`.
#[no_mangle]
pub unsafe extern "C" fn isect4d_report_to_json(report: *const Isect4dReport, out: *mut *mut c_char) -> Isect4dStatus {
    guard(|| {
        let r = &borrow(report, "report")?.report;
        let s = serde_json::to_string(r).map_err(|e| Fail(Isect4dStatus::Schema, e.to_string()))?;
        put(out, owned_string(s)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn isect4d_report_free(report: *mut Isect4dReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
