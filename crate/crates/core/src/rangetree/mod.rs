//! Multi-level canonical-set structures for the intersection setups.
//!
//! Each level stores one parameter point per object in a kd-tree. A query
//! turns every level's sub-condition into a sign condition on a polynomial
//! over that parameter space; boxes that satisfy it entirely hand their items
//! to the next level as a canonical set.

mod batched;
mod budget;
mod form;
pub(crate) mod interval;
mod tree;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    line_param, orient5, segment_tetra_direct, Hyperplane4, side_of_hyperplane, tri_tri_witness, twoplane_frame_sign, twoplane_param,
    Point4, Segment4, Sign, Tetrahedron4, Triangle4,
};
use crate::kernel::ANCHOR_XY;
use crate::oracle::line_flat_witness;
use crate::report::{IntersectionReport, QueryMode, ReportBuilder};

pub use batched::{batched_budget, batched_tri_tri};
pub use budget::{leaf_cutoff, StorageBudget};
pub use form::{classify_box, enclose, BoxClass, ParamBox, RangeForm, RowSpec, MAX_DIM};
pub use interval::Interval;
pub use tree::{BuildStats, QueryStats, TraceEvent};

use tree::{Catalog, Level, Probe, Search};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Setup {
    SegQueryTetraInput,
    TriTri,
    TetraQuerySegInput,
    Line2Flat,
}

const BRANCH_A: [i8; 6] = [-1, 1, 1, 1, 1, 1];


#[derive(Clone, Debug)]
struct Core {
    cat: Catalog,
    root: Level,
    fallback: Vec<u32>,
    budget: StorageBudget,
    stats: BuildStats,
}

type ItemRow = Option<(Vec<[Interval; MAX_DIM]>, Vec<i8>)>;

impl Core {
    fn build(dims: Vec<usize>, rows: Vec<ItemRow>, budget: StorageBudget, seed: u64) -> Result<Core> {
        if budget.n != rows.len() as u64 {
            return Err(Error::OutOfRange(format!("budget is for n={} but there are {} objects", budget.n, rows.len())));
        }
        let mut cat = Catalog::new(dims);
        let mut items = Vec::new();
        let mut fallback = Vec::new();
        for row in rows {
            match row {
                Some((pts, signs)) => items.push(cat.push(pts, signs)),
                None => fallback.push(cat.push_placeholder()),
            }
        }
        let (root, stats) = tree::build(&cat, items, &budget, seed);
        Ok(Core { cat, root, fallback, budget, stats })
    }

    fn rebuild(&self, budget: StorageBudget, seed: u64) -> Result<Core> {
        let n = self.cat.points.first().map_or(0, Vec::len);
        if budget.n != n as u64 {
            return Err(Error::OutOfRange(format!("budget is for n={} but there are {n} objects", budget.n)));
        }
        let items: Vec<u32> = (0..n as u32).filter(|i| !self.fallback.contains(i)).collect();
        let (root, stats) = tree::build(&self.cat, items, &budget, seed);
        Ok(Core { cat: self.cat.clone(), root, fallback: self.fallback.clone(), budget, stats })
    }

    fn run<P: Probe>(&self, probe: &P, index: usize, out: &mut ReportBuilder, stats: &mut QueryStats, trace: bool) -> Vec<TraceEvent> {
        let mut s = Search::new(&self.cat, probe, out, stats, index);
        if trace {
            s.trace = Some(Vec::new());
        }
        if self.cat.levels() == 1 {
            tree::search_zero(&mut s, &self.root, &self.fallback);
        } else {
            s.run(&self.root, &self.fallback);
        }
        s.trace.unwrap_or_default()
    }
}

macro_rules! query_api {
    ($query:ty) => {
        pub fn len(&self) -> usize {
            self.items.len()
        }

        pub fn is_empty(&self) -> bool {
            self.items.is_empty()
        }

        pub fn budget(&self) -> StorageBudget {
            self.core.budget
        }

        pub fn build_stats(&self) -> BuildStats {
            self.core.stats
        }

        /// Number of objects that could not be parametrized and are scanned directly.
        pub fn fallback_items(&self) -> Vec<usize> {
            self.core.fallback.iter().map(|&i| i as usize).collect()
        }

        /// Same objects under another budget, reusing their parametrization.
        pub fn rebuild(&self, budget: StorageBudget, seed: u64) -> Result<Self> {
            let core = self.core.rebuild(budget, seed)?;
            Ok(self.with_core(core))
        }

        pub fn query(&self, q: &$query, mode: QueryMode) -> (IntersectionReport, QueryStats) {
            self.query_at(q, 0, mode)
        }

        /// Answers one query, reporting pairs as `(index, object)`.
        pub fn query_at(&self, q: &$query, index: usize, mode: QueryMode) -> (IntersectionReport, QueryStats) {
            let mut out = ReportBuilder::new(mode);
            let mut stats = QueryStats::default();
            self.core.run(&self.probe(q), index, &mut out, &mut stats, false);
            (out.finish(), stats)
        }

        pub fn query_batch(&self, qs: &[$query], mode: QueryMode) -> (IntersectionReport, QueryStats) {
            let mut out = ReportBuilder::new(mode);
            let mut stats = QueryStats::default();
            for (i, q) in qs.iter().enumerate() {
                if out.done() {
                    break;
                }
                self.core.run(&self.probe(q), i, &mut out, &mut stats, false);
            }
            (out.finish(), stats)
        }

        /// Every hand-off made while answering `q` in report mode.
        pub fn trace(&self, q: &$query) -> Vec<TraceEvent> {
            let mut out = ReportBuilder::new(QueryMode::Report);
            let mut stats = QueryStats::default();
            self.core.run(&self.probe(q), 0, &mut out, &mut stats, true)
        }
    };
}

fn cubic_anchor_form(x: &Point4, y: &Point4) -> RangeForm {
    RangeForm::det5(&[
        RowSpec::point(x),
        RowSpec::point(y),
        RowSpec::anchor(0, 0, 0),
        RowSpec::anchor(1, 0, 1),
        RowSpec::anchor(2, 1, 1),
    ])
}

fn quadratic_line_form(p: &Point4, q: &Point4, r: &Point4) -> RangeForm {
    RangeForm::det5(&[
        RowSpec::line_anchor(0, 0),
        RowSpec::line_anchor(3, 1),
        RowSpec::point(p),
        RowSpec::point(q),
        RowSpec::point(r),
    ])
}

fn small3(t: &[&Point4; 3]) -> Option<[[i128; 4]; 3]> {
    let f = |p: &Point4| -> Option<[i128; 4]> {
        let v = p.small()?;
        v.iter().all(|c| c.unsigned_abs() < 1 << 40).then(|| v.map(|c| c as i128))
    };
    Some([f(t[0])?, f(t[1])?, f(t[2])?])
}

/// Anchor enclosures and frame sign straight from integer coordinates.
fn anchors6_small(p: &[i128; 4], q: &[i128; 4], r: &[i128; 4]) -> Option<Option<([Interval; MAX_DIM], i8)>> {
    let d1: [i128; 4] = std::array::from_fn(|i| q[i] - p[i]);
    let d2: [i128; 4] = std::array::from_fn(|i| r[i] - p[i]);
    let delta = d1[0].checked_mul(d2[1])?.checked_sub(d2[0].checked_mul(d1[1])?)?;
    if delta == 0 {
        return Some(None);
    }
    let mut out = [Interval::ZERO; MAX_DIM];
    for (k, &(x, y)) in ANCHOR_XY.iter().enumerate() {
        let bx = x as i128 - p[0];
        let by = y as i128 - p[1];
        let sn = bx.checked_mul(d2[1])?.checked_sub(d2[0].checked_mul(by)?)?;
        let tn = d1[0].checked_mul(by)?.checked_sub(bx.checked_mul(d1[1])?)?;
        for c in 0..2 {
            let num = p[2 + c]
                .checked_mul(delta)?
                .checked_add(sn.checked_mul(d1[2 + c])?)?
                .checked_add(tn.checked_mul(d2[2 + c])?)?;
            out[2 * k + c] = Interval::ratio(num, delta);
        }
    }
    Some(Some((out, -(delta.signum() as i8))))
}

fn anchors6(t: &[&Point4; 3]) -> Option<([Interval; MAX_DIM], i8)> {
    if let Some([p, q, r]) = small3(t) {
        if let Some(v) = anchors6_small(&p, &q, &r) {
            return v;
        }
    }
    let p = twoplane_param(t[0], t[1], t[2]).ok()?;
    Some((enclose(&p.point6()), twoplane_frame_sign(t[0], t[1], t[2]).to_i8()))
}

fn line6_small(a: &[i128; 4], b: &[i128; 4]) -> Option<Option<([Interval; MAX_DIM], i8)>> {
    let dw = b[3] - a[3];
    if dw == 0 {
        return Some(None);
    }
    let mut out = [Interval::ZERO; MAX_DIM];
    for i in 0..3 {
        let d = b[i] - a[i];
        let base = a[i].checked_mul(dw)?;
        out[i] = Interval::ratio(base.checked_sub(a[3].checked_mul(d)?)?, dw);
        out[3 + i] = Interval::ratio(base.checked_add((1 - a[3]).checked_mul(d)?)?, dw);
    }
    Some(Some((out, dw.signum() as i8)))
}

fn line6(a: &Point4, b: &Point4) -> Option<([Interval; MAX_DIM], i8)> {
    if let Some([x, y, _]) = small3(&[a, b, b]) {
        if let Some(v) = line6_small(&x, &y) {
            return v;
        }
    }
    let s = Segment4::new(a.clone(), b.clone()).ok()?;
    let p = line_param(&s).ok()?;
    Some((enclose(&p.point6()), Sign::of(&(b.w() - a.w())).to_i8()))
}

/// Hyperplane coefficients and offset, scaled to unit max norm.
fn plane5(h: &Hyperplane4) -> [Interval; MAX_DIM] {
    let mut out = [Interval::ZERO; MAX_DIM];
    if let Some((c, b)) = h.small() {
        let m = c.iter().chain(std::iter::once(b)).map(|v| v.unsigned_abs()).max().unwrap_or(1).max(1) as i128;
        for i in 0..4 {
            out[i] = Interval::ratio(c[i] as i128, m);
        }
        out[4] = Interval::ratio(*b as i128, m);
        return out;
    }
    let p = h.params();
    let m = p.iter().map(|v| v.abs()).max().expect("five parameters");
    enclose(&p.map(|v| v / &m))
}

/// Query segments against stored tetrahedra.
#[derive(Clone, Debug)]
pub struct TetraStructure {
    items: Vec<Tetrahedron4>,
    frames: Vec<[i8; 4]>,
    core: Core,
}

struct SegProbe<'a> {
    s: &'a TetraStructure,
    seg: &'a Segment4,
    forms: [RangeForm; 3],
}

impl Probe for SegProbe<'_> {
    fn form(&self, level: usize) -> &RangeForm {
        &self.forms[level.min(2)]
    }
    fn mult(&self, branch: usize, level: usize) -> i8 {
        if branch == 0 { BRANCH_A[level] } else { -BRANCH_A[level] }
    }
    fn branches(&self) -> usize {
        2
    }
    fn exact(&self, level: usize, item: u32) -> Sign {
        let t = &self.s.items[item as usize];
        match level {
            0 => side_of_hyperplane(self.seg.a(), t.hyperplane()),
            1 => side_of_hyperplane(self.seg.b(), t.hyperplane()),
            _ => {
                let k = level - 2;
                let [p, q, r] = t.facet(k);
                Sign::from_i8(self.s.frames[item as usize][k]) * orient5(self.seg.a(), self.seg.b(), p, q, r)
            }
        }
    }
    fn witness(&self, item: u32) -> Option<Point4> {
        segment_tetra_direct(self.seg, &self.s.items[item as usize])
    }
}

impl TetraStructure {
    pub fn build(tetrahedra: &[Tetrahedron4], budget: StorageBudget, seed: u64) -> Result<TetraStructure> {
        let mut frames = Vec::with_capacity(tetrahedra.len());
        let mut rows = Vec::with_capacity(tetrahedra.len());
        for t in tetrahedra {
            let h = plane5(t.hyperplane());
            let mut pts = vec![h, h];
            let mut signs = vec![1, 1];
            let mut fr = [0i8; 4];
            for k in 0..4 {
                if let Some((p, rho)) = anchors6(&t.facet(k)) {
                    pts.push(p);
                    signs.push(rho * t.facet_sign(k).to_i8());
                    fr[k] = rho;
                }
            }
            rows.push((pts.len() == 6).then_some((pts, signs)));
            frames.push(fr);
        }
        let core = Core::build(vec![5, 5, 6, 6, 6, 6], rows, budget, seed)?;
        Ok(TetraStructure { items: tetrahedra.to_vec(), frames, core })
    }

    fn with_core(&self, core: Core) -> Self {
        TetraStructure { items: self.items.clone(), frames: self.frames.clone(), core }
    }

    fn probe<'a>(&'a self, seg: &'a Segment4) -> SegProbe<'a> {
        let side = |p: &Point4| {
            let mut c: Vec<_> = p.coords().to_vec();
            c.push(crate::kernel::q(-1));
            RangeForm::linear(&[0, 1, 2, 3, 4], crate::kernel::q(0), &c)
        };
        SegProbe { s: self, seg, forms: [side(seg.a()), side(seg.b()), cubic_anchor_form(seg.a(), seg.b())] }
    }

    query_api!(Segment4);
}

/// Query tetrahedra against stored segments.
#[derive(Clone, Debug)]
pub struct SegmentStructure {
    items: Vec<Segment4>,
    core: Core,
}

struct TetraProbe<'a> {
    s: &'a SegmentStructure,
    t: &'a Tetrahedron4,
    forms: Vec<RangeForm>,
    mult: [i8; 6],
}

impl Probe for TetraProbe<'_> {
    fn form(&self, level: usize) -> &RangeForm {
        &self.forms[level.max(1) - 1]
    }
    fn mult(&self, branch: usize, level: usize) -> i8 {
        if branch == 0 { self.mult[level] } else { -self.mult[level] }
    }
    fn branches(&self) -> usize {
        2
    }
    fn exact(&self, level: usize, item: u32) -> Sign {
        let e = &self.s.items[item as usize];
        match level {
            0 => side_of_hyperplane(e.a(), self.t.hyperplane()),
            1 => side_of_hyperplane(e.b(), self.t.hyperplane()),
            _ => {
                let [p, q, r] = self.t.facet(level - 2);
                Sign::from_i8(self.s.core.cat.signs[level][item as usize]) * orient5(e.a(), e.b(), p, q, r)
            }
        }
    }
    fn witness(&self, item: u32) -> Option<Point4> {
        segment_tetra_direct(&self.s.items[item as usize], self.t)
    }
}

impl SegmentStructure {
    pub fn build(segments: &[Segment4], budget: StorageBudget, seed: u64) -> Result<SegmentStructure> {
        let rows = segments
            .iter()
            .map(|e| {
                let (p, eps) = line6(e.a(), e.b())?;
                let mut pts = vec![enclose(e.a().coords()), enclose(e.b().coords())];
                pts.extend([p; 4]);
                Some((pts, vec![1, 1, eps, eps, eps, eps]))
            })
            .collect();
        let core = Core::build(vec![4, 4, 6, 6, 6, 6], rows, budget, seed)?;
        Ok(SegmentStructure { items: segments.to_vec(), core })
    }

    fn with_core(&self, core: Core) -> Self {
        SegmentStructure { items: self.items.clone(), core }
    }

    fn probe<'a>(&'a self, t: &'a Tetrahedron4) -> TetraProbe<'a> {
        let h = t.hyperplane();
        let mut forms = vec![RangeForm::linear(&[0, 1, 2, 3], -h.offset().clone(), h.coeffs())];
        let mut mult = BRANCH_A;
        for k in 0..4 {
            let [p, q, r] = t.facet(k);
            forms.push(quadratic_line_form(p, q, r));
            mult[2 + k] = t.facet_sign(k).to_i8();
        }
        TetraProbe { s: self, t, forms, mult }
    }

    query_api!(Tetrahedron4);
}

/// Query triangles against stored triangles.
#[derive(Clone, Debug)]
pub struct TriangleStructure {
    items: Vec<Triangle4>,
    core: Core,
}

struct TriProbe<'a> {
    s: &'a TriangleStructure,
    red: &'a Triangle4,
    forms: [RangeForm; 4],
}

impl Probe for TriProbe<'_> {
    fn form(&self, level: usize) -> &RangeForm {
        &self.forms[level.min(3)]
    }
    fn mult(&self, branch: usize, _level: usize) -> i8 {
        if branch == 0 { 1 } else { -1 }
    }
    fn branches(&self) -> usize {
        2
    }
    fn exact(&self, level: usize, item: u32) -> Sign {
        let blue = &self.s.items[item as usize];
        let sign = Sign::from_i8(self.s.core.cat.signs[level][item as usize]);
        if level < 3 {
            let (x, y) = self.red.edges()[level];
            let [p, q, r] = blue.vertices();
            sign * orient5(x, y, p, q, r)
        } else {
            let (x, y) = blue.edges()[level - 3];
            let [p, q, r] = self.red.vertices();
            sign * orient5(x, y, p, q, r)
        }
    }
    fn witness(&self, item: u32) -> Option<Point4> {
        tri_tri_witness(self.red, &self.s.items[item as usize])
    }
}

impl TriangleStructure {
    pub fn build(triangles: &[Triangle4], budget: StorageBudget, seed: u64) -> Result<TriangleStructure> {
        let rows = triangles
            .iter()
            .map(|t| {
                let [p, q, r] = t.vertices();
                let (a, rho) = anchors6(&[p, q, r])?;
                let mut pts = vec![a; 3];
                let mut signs = vec![rho; 3];
                for (x, y) in t.edges() {
                    let (l, eps) = line6(x, y)?;
                    pts.push(l);
                    signs.push(eps);
                }
                Some((pts, signs))
            })
            .collect();
        let core = Core::build(vec![6; 6], rows, budget, seed)?;
        Ok(TriangleStructure { items: triangles.to_vec(), core })
    }

    fn with_core(&self, core: Core) -> Self {
        TriangleStructure { items: self.items.clone(), core }
    }

    fn probe<'a>(&'a self, red: &'a Triangle4) -> TriProbe<'a> {
        let e = red.edges();
        let [p, q, r] = red.vertices();
        TriProbe {
            s: self,
            red,
            forms: [
                cubic_anchor_form(e[0].0, e[0].1),
                cubic_anchor_form(e[1].0, e[1].1),
                cubic_anchor_form(e[2].0, e[2].1),
                quadratic_line_form(p, q, r),
            ],
        }
    }

    query_api!(Triangle4);
}

/// Query lines against stored 2-flats.
#[derive(Clone, Debug)]
pub struct FlatStructure {
    items: Vec<[Point4; 3]>,
    core: Core,
}

struct LineProbe<'a> {
    s: &'a FlatStructure,
    line: &'a Segment4,
    form: RangeForm,
}

impl Probe for LineProbe<'_> {
    fn form(&self, _level: usize) -> &RangeForm {
        &self.form
    }
    fn mult(&self, _branch: usize, _level: usize) -> i8 {
        1
    }
    fn branches(&self) -> usize {
        1
    }
    fn exact(&self, _level: usize, item: u32) -> Sign {
        let [p, q, r] = &self.s.items[item as usize];
        orient5(self.line.a(), self.line.b(), p, q, r)
    }
    fn witness(&self, item: u32) -> Option<Point4> {
        line_flat_witness(self.line, &self.s.items[item as usize])
    }
}

impl FlatStructure {
    pub fn build(flats: &[[Point4; 3]], budget: StorageBudget, seed: u64) -> Result<FlatStructure> {
        for f in flats {
            if crate::kernel::collinear(&f[0], &f[1], &f[2]) {
                return Err(Error::InvalidObject("2-flat spanned by collinear points".into()));
            }
        }
        let rows = flats
            .iter()
            .map(|[p, q, r]| anchors6(&[p, q, r]).map(|(a, _)| (vec![a], vec![1])))
            .collect();
        let core = Core::build(vec![6], rows, budget, seed)?;
        Ok(FlatStructure { items: flats.to_vec(), core })
    }

    fn with_core(&self, core: Core) -> Self {
        FlatStructure { items: self.items.clone(), core }
    }

    fn probe<'a>(&'a self, line: &'a Segment4) -> LineProbe<'a> {
        LineProbe { s: self, line, form: cubic_anchor_form(line.a(), line.b()) }
    }

    query_api!(Segment4);
}

/// Input objects for [`MultiLevelStructure::build`].
#[derive(Clone, Debug)]
pub enum SceneObjects {
    Segments(Vec<Segment4>),
    Triangles(Vec<Triangle4>),
    Tetrahedra(Vec<Tetrahedron4>),
    Flats(Vec<[Point4; 3]>),
}

#[derive(Clone, Copy, Debug)]
pub enum QueryObject<'a> {
    Segment(&'a Segment4),
    Triangle(&'a Triangle4),
    Tetrahedron(&'a Tetrahedron4),
}

#[derive(Clone, Debug)]
pub enum MultiLevelStructure {
    SegQueryTetraInput(TetraStructure),
    TriTri(TriangleStructure),
    TetraQuerySegInput(SegmentStructure),
    Line2Flat(FlatStructure),
}

fn incompatible(setup: Setup) -> Error {
    Error::InvalidObject(format!("objects do not match setup {setup:?}"))
}

impl MultiLevelStructure {
    pub fn build(objects: &SceneObjects, setup: Setup, budget: StorageBudget, seed: u64) -> Result<MultiLevelStructure> {
        Ok(match (setup, objects) {
            (Setup::SegQueryTetraInput, SceneObjects::Tetrahedra(t)) => Self::SegQueryTetraInput(TetraStructure::build(t, budget, seed)?),
            (Setup::TriTri, SceneObjects::Triangles(t)) => Self::TriTri(TriangleStructure::build(t, budget, seed)?),
            (Setup::TetraQuerySegInput, SceneObjects::Segments(s)) => Self::TetraQuerySegInput(SegmentStructure::build(s, budget, seed)?),
            (Setup::Line2Flat, SceneObjects::Flats(f)) => Self::Line2Flat(FlatStructure::build(f, budget, seed)?),
            _ => return Err(incompatible(setup)),
        })
    }

    pub fn setup(&self) -> Setup {
        match self {
            Self::SegQueryTetraInput(_) => Setup::SegQueryTetraInput,
            Self::TriTri(_) => Setup::TriTri,
            Self::TetraQuerySegInput(_) => Setup::TetraQuerySegInput,
            Self::Line2Flat(_) => Setup::Line2Flat,
        }
    }

    pub fn build_stats(&self) -> BuildStats {
        match self {
            Self::SegQueryTetraInput(s) => s.build_stats(),
            Self::TriTri(s) => s.build_stats(),
            Self::TetraQuerySegInput(s) => s.build_stats(),
            Self::Line2Flat(s) => s.build_stats(),
        }
    }

    pub fn query(&self, q: QueryObject<'_>, mode: QueryMode) -> Result<(IntersectionReport, QueryStats)> {
        Ok(match (self, q) {
            (Self::SegQueryTetraInput(s), QueryObject::Segment(e)) => s.query(e, mode),
            (Self::TriTri(s), QueryObject::Triangle(t)) => s.query(t, mode),
            (Self::TetraQuerySegInput(s), QueryObject::Tetrahedron(t)) => s.query(t, mode),
            (Self::Line2Flat(s), QueryObject::Segment(e)) => s.query(e, mode),
            _ => return Err(incompatible(self.setup())),
        })
    }
}
