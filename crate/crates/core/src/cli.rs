//! The `isect4d` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde::Serialize;

use crate::ccd::{detect_collisions_oracle, detect_collisions_with, CcdOptions};
use crate::complexity::{self, CostModel, Unfolding, ZeroSetCosts};
use crate::error::Error;
use crate::kernel::{Point4, Segment4, Tetrahedron4, Triangle4};
use crate::oracle;
use crate::rangetree::{
    batched_budget, BuildStats, FlatStructure, QueryStats, SegmentStructure, StorageBudget, TetraStructure, TriangleStructure,
};
use crate::report::{IntersectionReport, QueryMode};
use crate::scene::{generate, SceneFile, SceneKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Schema(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange(_) | Error::BudgetOutOfRange { .. } => CliError::Usage(e.to_string()),
            Error::RetriesExhausted(_) => CliError::Io(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "isect4d", version, about = "Exact intersection searching among simplices in R^4")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scene.
    Gen(GenArgs),
    /// Answer a batch of intersection queries.
    Query(QueryArgs),
    /// Collision detection among moving tetrahedra.
    Ccd(CcdArgs),
    /// Count arrangement entities of a set of tetrahedra.
    Arrange(ArrangeArgs),
    /// Batched lines against 2-flats.
    Flats(FlatsArgs),
    /// Structure statistics over a storage grid.
    Bench(BenchArgs),
    /// Analytic exponents of the tradeoff curves.
    Predict(PredictArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Segments,
    Triangles,
    Tetrahedra,
    MovingTetrahedra,
    FlatsAndLines,
}

impl From<KindArg> for SceneKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Segments => SceneKind::Segments,
            KindArg::Triangles => SceneKind::Triangles,
            KindArg::Tetrahedra => SceneKind::Tetrahedra,
            KindArg::MovingTetrahedra => SceneKind::MovingTetrahedra,
            KindArg::FlatsAndLines => SceneKind::FlatsAndLines,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Detect,
    Count,
    Report,
}

impl From<ModeArg> for QueryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Detect => QueryMode::Detect,
            ModeArg::Count => QueryMode::Count,
            ModeArg::Report => QueryMode::Report,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Oracle,
    Structure,
    Both,
}

impl Engine {
    fn oracle(self) -> bool {
        self != Engine::Structure
    }

    fn structure(self) -> bool {
        self != Engine::Oracle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetupArg {
    SegTetra,
    TriTri,
    TetraSeg,
    LineFlat,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Destination file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    /// Coordinates are drawn from [-range, range].
    #[arg(long, default_value_t = 1000)]
    pub range: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Input objects the structure is built on.
    #[arg(long)]
    pub scene: PathBuf,
    /// Query objects; optional for line-flat, which otherwise uses the lines of the scene.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub setup: SetupArg,
    #[arg(long, value_enum, default_value = "report")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub engine: Engine,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CcdArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_enum, default_value = "report")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "structure")]
    pub engine: Engine,
    /// Subproblems up to this size are solved exhaustively.
    #[arg(long, default_value_t = 32)]
    pub threshold: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ArrangeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_enum, default_value = "structure")]
    pub engine: Engine,
    /// Writes every counted entity with its witness point as JSON.
    #[arg(long)]
    pub witnesses: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FlatsArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_enum, default_value = "report")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "both")]
    pub engine: Engine,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub setup: SetupArg,
    /// Comma separated values or `start:end:step`.
    #[arg(long, default_value = "1,1.5,2,3,6")]
    pub sigmas: String,
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    #[arg(long, value_enum, default_value = "report")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Storage exponents, comma separated or `start:end:step`.
    #[arg(long, conflicts_with_all = ["mus", "fits"])]
    pub sigmas: Option<String>,
    /// Exponents of the number of red objects.
    #[arg(long, conflicts_with = "fits")]
    pub mus: Option<String>,
    /// Fitted exponents of the unfolded recurrences.
    #[arg(long)]
    pub fits: bool,
    /// Problem size at which the early-stopping expression is evaluated.
    #[arg(long, default_value_t = 1_048_576.0)]
    pub n: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Query(a) => query(a),
        Command::Ccd(a) => ccd(a),
        Command::Arrange(a) => arrange(a),
        Command::Flats(a) => flats(a),
        Command::Bench(a) => bench(a),
        Command::Predict(a) => predict(a),
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match path {
        None => std::io::stdout().lock().write_all(bytes).map_err(io),
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut f = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            f.write_all(bytes).map_err(io)?;
            f.persist(p).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("output serializes");
    s.push(b'\n');
    s
}

fn csv_rows<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn read_scene(path: &Path) -> CliResult<SceneFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(SceneFile::from_json(&text)?)
}

fn check_sigma(sigma: f64) -> CliResult<()> {
    if !(1.0..=6.0).contains(&sigma) {
        return Err(CliError::Usage(format!("sigma {sigma} outside [1, 6]")));
    }
    Ok(())
}

/// Parses `a,b,c` or `start:end:step`; values may be decimals or fractions.
pub fn parse_grid(text: &str) -> CliResult<Vec<Rational64>> {
    let bad = || CliError::Usage(format!("bad grid {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let [a, b, step] = [parts[0], parts[1], parts[2]].map(parse_ratio);
        let (a, b, step) = (a.ok_or_else(bad)?, b.ok_or_else(bad)?, step.ok_or_else(bad)?);
        if step <= Rational64::from(0) {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut x = a;
        while x <= b {
            out.push(x);
            x += step;
        }
        return Ok(out);
    }
    text.split(',').map(|s| parse_ratio(s).ok_or_else(bad)).collect()
}

fn parse_ratio(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (i64, i64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (d != 0).then(|| Rational64::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let neg = int.starts_with('-');
    let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
        return None;
    }
    let v = Rational64::new(digits.parse().ok()?, 10i64.checked_pow(frac.len() as u32)?);
    Some(if neg { -v } else { v })
}

fn to_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn gen(a: GenArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let scene = generate(a.kind.into(), a.n, a.range, a.seed)?;
    emit(a.out.as_deref(), scene.to_json().as_bytes())
}

/// Inputs of one query setup, as (input objects, query objects).
pub enum Workload {
    SegTetra(Vec<Tetrahedron4>, Vec<Segment4>),
    TriTri(Vec<Triangle4>, Vec<Triangle4>),
    TetraSeg(Vec<Segment4>, Vec<Tetrahedron4>),
    LineFlat(Vec<[Point4; 3]>, Vec<Segment4>),
}

pub enum Built {
    Tetra(TetraStructure),
    Triangle(TriangleStructure),
    Segment(SegmentStructure),
    Flat(FlatStructure),
}

impl Workload {
    pub fn load(setup: SetupArg, scene: &SceneFile, queries: Option<&SceneFile>) -> CliResult<Workload> {
        let need = || queries.ok_or_else(|| CliError::Usage(format!("setup {setup:?} needs --queries")));
        Ok(match setup {
            SetupArg::SegTetra => Workload::SegTetra(scene.tetrahedra()?, need()?.segments()?),
            SetupArg::TriTri => Workload::TriTri(scene.triangles()?, need()?.triangles()?),
            SetupArg::TetraSeg => Workload::TetraSeg(scene.segments()?, need()?.tetrahedra()?),
            SetupArg::LineFlat => {
                let (flats, mut lines) = scene.flats_and_lines()?;
                if let Some(q) = queries {
                    lines = q.flats_and_lines()?.1;
                }
                Workload::LineFlat(flats, lines)
            }
        })
    }

    /// Number of input objects.
    pub fn n(&self) -> usize {
        match self {
            Workload::SegTetra(t, _) => t.len(),
            Workload::TriTri(t, _) => t.len(),
            Workload::TetraSeg(s, _) => s.len(),
            Workload::LineFlat(f, _) => f.len(),
        }
    }

    /// Number of queries.
    pub fn m(&self) -> usize {
        match self {
            Workload::SegTetra(_, q) => q.len(),
            Workload::TriTri(_, q) => q.len(),
            Workload::TetraSeg(_, q) => q.len(),
            Workload::LineFlat(_, q) => q.len(),
        }
    }

    pub fn oracle(&self, mode: QueryMode) -> IntersectionReport {
        match self {
            Workload::SegTetra(t, q) => oracle::seg_tetra_query(q, t, mode),
            Workload::TriTri(t, q) => oracle::tri_tri_query(q, t, mode),
            Workload::TetraSeg(s, q) => oracle::tetra_seg_query(q, s, mode),
            Workload::LineFlat(f, q) => oracle::line_2flat_query(q, f, mode),
        }
    }

    pub fn build(&self, budget: StorageBudget, seed: u64) -> CliResult<Built> {
        Ok(match self {
            Workload::SegTetra(t, _) => Built::Tetra(TetraStructure::build(t, budget, seed)?),
            Workload::TriTri(t, _) => Built::Triangle(TriangleStructure::build(t, budget, seed)?),
            Workload::TetraSeg(s, _) => Built::Segment(SegmentStructure::build(s, budget, seed)?),
            Workload::LineFlat(f, _) => Built::Flat(FlatStructure::build(f, budget, seed)?),
        })
    }
}

impl Built {
    pub fn query(&self, w: &Workload, mode: QueryMode) -> (IntersectionReport, QueryStats) {
        match (self, w) {
            (Built::Tetra(s), Workload::SegTetra(_, q)) => s.query_batch(q, mode),
            (Built::Triangle(s), Workload::TriTri(_, q)) => s.query_batch(q, mode),
            (Built::Segment(s), Workload::TetraSeg(_, q)) => s.query_batch(q, mode),
            (Built::Flat(s), Workload::LineFlat(_, q)) => s.query_batch(q, mode),
            _ => unreachable!("structure built from this workload"),
        }
    }

    pub fn rebuild(&self, budget: StorageBudget, seed: u64) -> CliResult<Built> {
        Ok(match self {
            Built::Tetra(s) => Built::Tetra(s.rebuild(budget, seed)?),
            Built::Triangle(s) => Built::Triangle(s.rebuild(budget, seed)?),
            Built::Segment(s) => Built::Segment(s.rebuild(budget, seed)?),
            Built::Flat(s) => Built::Flat(s.rebuild(budget, seed)?),
        })
    }

    pub fn build_stats(&self) -> BuildStats {
        match self {
            Built::Tetra(s) => s.build_stats(),
            Built::Triangle(s) => s.build_stats(),
            Built::Segment(s) => s.build_stats(),
            Built::Flat(s) => s.build_stats(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QueryOutput {
    setup: SetupArg,
    mode: QueryMode,
    engine: Engine,
    n: usize,
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    leaf_cutoff: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<IntersectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<IntersectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    build: Option<BuildStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<QueryStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<bool>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HitRow {
    source: &'static str,
    index_a: usize,
    index_b: usize,
    x: String,
    y: String,
    z: String,
    w: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SummaryRow {
    source: &'static str,
    mode: QueryMode,
    detected: bool,
    count: u64,
}

fn reports_csv(mode: QueryMode, reports: &[(&'static str, &IntersectionReport)]) -> CliResult<Vec<u8>> {
    if mode != QueryMode::Report {
        let rows: Vec<SummaryRow> =
            reports.iter().map(|(source, r)| SummaryRow { source, mode, detected: r.detected, count: r.count }).collect();
        return csv_rows(&rows);
    }
    let mut rows = Vec::new();
    for (source, r) in reports {
        for h in &r.pairs {
            let [x, y, z, w] = h.witness.to_strings();
            rows.push(HitRow { source, index_a: h.a, index_b: h.b, x, y, z, w });
        }
    }
    if rows.is_empty() {
        return Ok(b"source,indexA,indexB,x,y,z,w\n".to_vec());
    }
    csv_rows(&rows)
}

fn finish_query(out: QueryOutput, output: &Output) -> CliResult<()> {
    let bytes = match output.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut reports = Vec::new();
            if let Some(r) = &out.oracle {
                reports.push(("oracle", r));
            }
            if let Some(r) = &out.structure {
                reports.push(("structure", r));
            }
            reports_csv(out.mode, &reports)?
        }
    };
    emit(output.out.as_deref(), &bytes)?;
    if out.mismatch == Some(true) {
        return Err(CliError::Mismatch("structure and oracle reports differ".into()));
    }
    Ok(())
}

fn query(a: QueryArgs) -> CliResult<()> {
    check_sigma(a.sigma)?;
    let scene = read_scene(&a.scene)?;
    let queries = a.queries.as_deref().map(read_scene).transpose()?;
    let w = Workload::load(a.setup, &scene, queries.as_ref())?;
    let mode = a.mode.into();
    let budget = StorageBudget::from_sigma(w.n() as u64, a.sigma)?;
    let oracle = a.engine.oracle().then(|| w.oracle(mode));
    let (structure, build, stats) = if a.engine.structure() {
        let b = w.build(budget, a.seed)?;
        let (r, st) = b.query(&w, mode);
        (Some(r), Some(b.build_stats()), Some(st))
    } else {
        (None, None, None)
    };
    let mismatch = match (&oracle, &structure) {
        (Some(o), Some(s)) => Some(o != s),
        _ => None,
    };
    let out = QueryOutput {
        setup: a.setup,
        mode,
        engine: a.engine,
        n: w.n(),
        m: w.m(),
        sigma: Some(a.sigma),
        s: Some(budget.s.to_string()),
        leaf_cutoff: Some(budget.leaf_cutoff()),
        oracle,
        structure,
        build,
        stats,
        mismatch,
    };
    finish_query(out, &a.output)
}

fn flats(a: FlatsArgs) -> CliResult<()> {
    let scene = read_scene(&a.scene)?;
    let w = Workload::load(SetupArg::LineFlat, &scene, None)?;
    let mode = a.mode.into();
    let budget = batched_budget(w.m() as u64, w.n() as u64);
    let oracle = a.engine.oracle().then(|| w.oracle(mode));
    let (structure, build, stats) = match (a.engine.structure(), budget) {
        (false, _) => (None, None, None),
        (true, Some(b)) => {
            let built = w.build(b, a.seed)?;
            let (r, st) = built.query(&w, mode);
            (Some(r), Some(built.build_stats()), Some(st))
        }
        // Outside the batched regime the exhaustive scan is the structure's answer.
        (true, None) => (Some(oracle.clone().unwrap_or_else(|| w.oracle(mode))), None, None),
    };
    let mismatch = match (&oracle, &structure) {
        (Some(o), Some(s)) => Some(o != s),
        _ => None,
    };
    let out = QueryOutput {
        setup: SetupArg::LineFlat,
        mode,
        engine: a.engine,
        n: w.n(),
        m: w.m(),
        sigma: budget.map(|b| b.sigma()),
        s: budget.map(|b| b.s.to_string()),
        leaf_cutoff: budget.map(|b| b.leaf_cutoff()),
        oracle,
        structure,
        build,
        stats,
        mismatch,
    };
    finish_query(out, &a.output)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CcdOutput {
    mode: QueryMode,
    engine: Engine,
    n: usize,
    threshold: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<IntersectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<IntersectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<bool>,
}

fn ccd(a: CcdArgs) -> CliResult<()> {
    let scene = read_scene(&a.scene)?.moving_tetrahedra()?;
    let mode = a.mode.into();
    let oracle = a.engine.oracle().then(|| detect_collisions_oracle(&scene, mode));
    let opts = CcdOptions { threshold: a.threshold.max(1), seed: a.seed };
    let structure = a.engine.structure().then(|| detect_collisions_with(&scene, mode, opts));
    let mismatch = match (&oracle, &structure) {
        (Some(o), Some(s)) => Some(o != s),
        _ => None,
    };
    let out = CcdOutput { mode, engine: a.engine, n: scene.len(), threshold: a.threshold, oracle, structure, mismatch };
    let bytes = match a.output.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut reports = Vec::new();
            if let Some(r) = &out.oracle {
                reports.push(("oracle", r));
            }
            if let Some(r) = &out.structure {
                reports.push(("structure", r));
            }
            reports_csv(mode, &reports)?
        }
    };
    emit(a.output.out.as_deref(), &bytes)?;
    if mismatch == Some(true) {
        return Err(CliError::Mismatch("structure and oracle collision reports differ".into()));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ArrangeOutput {
    n: usize,
    engine: Engine,
    k2: u64,
    k3: u64,
    k4: u64,
    by_kind: std::collections::BTreeMap<String, u64>,
    /// Whether `k4 >= k3 >= k2` holds.
    ordered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<bool>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ArrangeRow {
    n: usize,
    k2: u64,
    k3: u64,
    k4: u64,
    edge_tetra: u64,
    face_face: u64,
    face_tetra_tetra: u64,
    quad: u64,
    ordered: bool,
}

fn arrange(a: ArrangeArgs) -> CliResult<()> {
    let t = read_scene(&a.scene)?.tetrahedra()?;
    let oracle = a.engine.oracle().then(|| oracle::arrangement_k_counts(&t)).transpose()?;
    let structure = a.engine.structure().then(|| crate::arrangement::enumerate(&t)).transpose()?;
    // Pair and triple witnesses may differ between the engines; their index sets may not.
    let ids = |v: &[oracle::Entity]| v.iter().map(|e| e.tetrahedra.clone()).collect::<Vec<_>>();
    let mismatch = match (&oracle, &structure) {
        (Some(o), Some(s)) => Some(
            o.counts != s.counts || ids(&o.pairs) != ids(&s.pairs) || ids(&o.triples) != ids(&s.triples) || o.vertices != s.vertices,
        ),
        _ => None,
    };
    let arr = structure.as_ref().or(oracle.as_ref()).expect("at least one engine");
    let k = &arr.counts;
    let kind = |s: &str| k.by_kind.get(s).copied().unwrap_or(0);
    let ordered = k.k4 >= k.k3 && k.k3 >= k.k2;
    let bytes = match a.output.format {
        Format::Json => json(&ArrangeOutput {
            n: t.len(),
            engine: a.engine,
            k2: k.k2,
            k3: k.k3,
            k4: k.k4,
            by_kind: k.by_kind.clone(),
            ordered,
            mismatch,
        }),
        Format::Csv => csv_rows(&[ArrangeRow {
            n: t.len(),
            k2: k.k2,
            k3: k.k3,
            k4: k.k4,
            edge_tetra: kind("EDGE_TETRA"),
            face_face: kind("FACE_FACE"),
            face_tetra_tetra: kind("FACE_TETRA_TETRA"),
            quad: kind("QUAD"),
            ordered,
        }])?,
    };
    if let Some(p) = &a.witnesses {
        emit(Some(p), &json(arr))?;
    }
    emit(a.output.out.as_deref(), &bytes)?;
    if mismatch == Some(true) {
        return Err(CliError::Mismatch("enumeration and exhaustive counts differ".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub setup: SetupArg,
    pub n: usize,
    pub m: usize,
    pub sigma: f64,
    pub s: String,
    pub build_nodes: u64,
    pub canonical_sets_touched: u64,
    pub leaf_items_scanned: u64,
    pub exact_predicate_calls: u64,
    pub wall_millis: u64,
    pub seed: u64,
    pub leaf_cutoff: u64,
    pub mismatch: bool,
    pub rep: usize,
    /// Whether the median of `leafItemsScanned` never increases along the grid.
    pub scan_monotone: bool,
}

fn bench(a: BenchArgs) -> CliResult<()> {
    let sigmas: Vec<f64> = parse_grid(&a.sigmas)?.into_iter().map(to_f64).collect();
    for &s in &sigmas {
        check_sigma(s)?;
    }
    let scene = read_scene(&a.scene)?;
    let queries = a.queries.as_deref().map(read_scene).transpose()?;
    let w = Workload::load(a.setup, &scene, queries.as_ref())?;
    let mode: QueryMode = a.mode.into();
    let want = w.oracle(mode);
    let n = w.n() as u64;
    let mut rows = Vec::new();
    let mut base: Option<Built> = None;
    for rep in 0..a.repetitions.max(1) {
        for &sigma in &sigmas {
            let budget = StorageBudget::from_sigma(n, sigma)?;
            let start = Instant::now();
            let built = match &base {
                Some(b) => b.rebuild(budget, a.seed)?,
                None => w.build(budget, a.seed)?,
            };
            let (got, stats) = built.query(&w, mode);
            let wall_millis = start.elapsed().as_millis() as u64;
            rows.push(BenchRow {
                setup: a.setup,
                n: w.n(),
                m: w.m(),
                sigma,
                s: budget.s.to_string(),
                build_nodes: built.build_stats().nodes,
                canonical_sets_touched: stats.canonical_sets_touched,
                leaf_items_scanned: stats.leaf_items_scanned,
                exact_predicate_calls: stats.exact_predicate_calls,
                wall_millis,
                seed: a.seed,
                leaf_cutoff: budget.leaf_cutoff(),
                mismatch: got != want,
                rep,
                scan_monotone: false,
            });
            base.get_or_insert(built);
        }
    }
    let medians: Vec<u64> = (0..sigmas.len())
        .map(|i| {
            let mut v: Vec<u64> = rows.iter().skip(i).step_by(sigmas.len()).map(|r| r.leaf_items_scanned).collect();
            v.sort_unstable();
            v[v.len() / 2]
        })
        .collect();
    let monotone = medians.windows(2).all(|p| p[1] <= p[0]);
    for r in &mut rows {
        r.scan_monotone = monotone;
    }
    emit(a.out.as_deref(), &csv_rows(&rows)?)?;
    if rows.iter().any(|r| r.mismatch) {
        return Err(CliError::Mismatch("structure disagreed with the oracle".into()));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SigmaRow {
    sigma: f64,
    query_exponent: f64,
    query_exponent_exact: String,
    premature_exponent: f64,
    leaf_size_exponent: f64,
    balance: &'static str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MuRow {
    mu: f64,
    first: f64,
    second: f64,
    total: f64,
    total_exact: String,
    dominant: &'static str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FitRow {
    recurrence: &'static str,
    unfolding: Unfolding,
    storage_exponent: f64,
    storage_residual: f64,
    query_exponent: f64,
    query_residual: f64,
}

fn table<T: Serialize>(rows: &[T], format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => Ok(json(&rows)),
        Format::Csv => csv_rows(rows),
    }
}

fn predict(a: PredictArgs) -> CliResult<()> {
    let model = CostModel::default();
    let bytes = if let Some(g) = &a.mus {
        let rows = parse_grid(g)?
            .into_iter()
            .map(|mu| {
                let e = complexity::batched_cost_exponents(mu)?;
                Ok(MuRow {
                    mu: to_f64(mu),
                    first: to_f64(e.first),
                    second: to_f64(e.second),
                    total: to_f64(e.total),
                    total_exact: e.total.to_string(),
                    dominant: if e.first_dominates { "first" } else { "second" },
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        table(&rows, a.format)?
    } else if a.fits {
        let ns = complexity::power_grid(10, 24);
        let mut rows = Vec::new();
        for unfolding in [Unfolding::Modeled, Unfolding::Literal] {
            let wide = complexity::unfold_wide(&ns, 2.0, &model, unfolding)?;
            let main = complexity::unfold_main(&ns, &model, unfolding, ZeroSetCosts::default())?;
            for (recurrence, f) in [("wide", wide), ("main", main)] {
                rows.push(FitRow {
                    recurrence,
                    unfolding,
                    storage_exponent: f.storage.exponent,
                    storage_residual: f.storage.residual,
                    query_exponent: f.query.exponent,
                    query_residual: f.query.residual,
                });
            }
        }
        table(&rows, a.format)?
    } else {
        if a.n.is_nan() || a.n <= 1.0 {
            return Err(CliError::Usage("--n must exceed 1".into()));
        }
        let grid = parse_grid(a.sigmas.as_deref().unwrap_or("1:6:1/2"))?;
        let rows = grid
            .into_iter()
            .map(|sigma| {
                let q = complexity::q_tradeoff_exponent(sigma)?;
                let p = complexity::unfold_premature(a.n, to_f64(sigma), &model)?;
                Ok(SigmaRow {
                    sigma: to_f64(sigma),
                    query_exponent: to_f64(q),
                    query_exponent_exact: q.to_string(),
                    premature_exponent: p.exponent,
                    leaf_size_exponent: to_f64(complexity::leaf_size_exponent(sigma)?),
                    balance: if p.balanced_first { "first-last" } else { "second-last" },
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        table(&rows, a.format)?
    };
    emit(a.out.as_deref(), &bytes)
}
