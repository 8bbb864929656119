//! Scene files and deterministic random scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ccd::MovingTetrahedron;
use crate::error::{Error, Result};
use crate::kernel::{q, Point4, Segment4, Tetrahedron4, Triangle4};

pub const SCENE_VERSION: u32 = 1;
const MAX_RETRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SceneKind {
    Segments,
    Triangles,
    Tetrahedra,
    MovingTetrahedra,
    FlatsAndLines,
}

impl SceneKind {
    pub fn arities(self) -> &'static [usize] {
        match self {
            SceneKind::Segments => &[8],
            SceneKind::Triangles => &[12],
            SceneKind::Tetrahedra => &[16],
            SceneKind::MovingTetrahedra => &[17],
            SceneKind::FlatsAndLines => &[12, 8],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneFile {
    pub version: u32,
    pub kind: SceneKind,
    pub objects: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn points<const N: usize>(obj: &[String]) -> Result<[Point4; N]> {
    let v: Vec<Point4> = obj.chunks(4).map(Point4::parse).collect::<Result<_>>()?;
    v.try_into().map_err(|_| Error::Schema("wrong number of coordinates".into()))
}

fn strings(pts: &[&Point4]) -> Vec<String> {
    pts.iter().flat_map(|p| p.to_strings()).collect()
}

fn schema(e: Error) -> Error {
    match e {
        Error::Schema(_) => e,
        other => Error::Schema(other.to_string()),
    }
}

impl SceneFile {
    pub fn new(kind: SceneKind, objects: Vec<Vec<String>>, seed: Option<u64>) -> SceneFile {
        SceneFile { version: SCENE_VERSION, kind, objects, seed }
    }

    pub fn from_json(text: &str) -> Result<SceneFile> {
        let s: SceneFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    /// Checks version, arities and that every object parses.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCENE_VERSION {
            return Err(Error::Schema(format!("unsupported scene version {}", self.version)));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !self.kind.arities().contains(&o.len()) {
                return Err(Error::Schema(format!("object {i} has {} values, expected {:?}", o.len(), self.kind.arities())));
            }
        }
        match self.kind {
            SceneKind::Segments => self.segments().map(drop),
            SceneKind::Triangles => self.triangles().map(drop),
            SceneKind::Tetrahedra => self.tetrahedra().map(drop),
            SceneKind::MovingTetrahedra => self.moving_tetrahedra().map(drop),
            SceneKind::FlatsAndLines => self.flats_and_lines().map(drop),
        }
    }

    fn expect(&self, kind: SceneKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Schema(format!("expected a {kind:?} scene, found {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn segments(&self) -> Result<Vec<Segment4>> {
        self.expect(SceneKind::Segments)?;
        self.objects.iter().map(|o| parse_segment(o)).collect::<Result<_>>().map_err(schema)
    }

    pub fn triangles(&self) -> Result<Vec<Triangle4>> {
        self.expect(SceneKind::Triangles)?;
        self.objects
            .iter()
            .map(|o| {
                let [a, b, c] = points::<3>(o)?;
                Triangle4::new(a, b, c)
            })
            .collect::<Result<_>>()
            .map_err(schema)
    }

    pub fn tetrahedra(&self) -> Result<Vec<Tetrahedron4>> {
        self.expect(SceneKind::Tetrahedra)?;
        self.objects
            .iter()
            .map(|o| {
                let [a, b, c, d] = points::<4>(o)?;
                Tetrahedron4::new(a, b, c, d)
            })
            .collect::<Result<_>>()
            .map_err(schema)
    }

    pub fn moving_tetrahedra(&self) -> Result<Vec<MovingTetrahedron>> {
        self.expect(SceneKind::MovingTetrahedra)?;
        self.objects.iter().map(|o| MovingTetrahedron::parse(o)).collect::<Result<_>>().map_err(schema)
    }

    /// Flats (12 values) and lines (8 values), each in file order.
    pub fn flats_and_lines(&self) -> Result<(Vec<[Point4; 3]>, Vec<Segment4>)> {
        self.expect(SceneKind::FlatsAndLines)?;
        let mut flats = Vec::new();
        let mut lines = Vec::new();
        for o in &self.objects {
            if o.len() == 12 {
                let f = points::<3>(o).map_err(schema)?;
                if crate::kernel::collinear(&f[0], &f[1], &f[2]) {
                    return Err(Error::Schema("2-flat spanned by collinear points".into()));
                }
                flats.push(f);
            } else {
                lines.push(parse_segment(o).map_err(schema)?);
            }
        }
        Ok((flats, lines))
    }

    pub fn from_segments(s: &[Segment4], seed: Option<u64>) -> SceneFile {
        SceneFile::new(SceneKind::Segments, s.iter().map(|e| strings(&[e.a(), e.b()])).collect(), seed)
    }

    pub fn from_triangles(t: &[Triangle4], seed: Option<u64>) -> SceneFile {
        SceneFile::new(SceneKind::Triangles, t.iter().map(|t| strings(&[t.p(), t.q(), t.r()])).collect(), seed)
    }

    pub fn from_tetrahedra(t: &[Tetrahedron4], seed: Option<u64>) -> SceneFile {
        let objs = t.iter().map(|t| strings(&t.vertices().iter().collect::<Vec<_>>())).collect();
        SceneFile::new(SceneKind::Tetrahedra, objs, seed)
    }

    pub fn from_moving(m: &[MovingTetrahedron], seed: Option<u64>) -> SceneFile {
        SceneFile::new(SceneKind::MovingTetrahedra, m.iter().map(MovingTetrahedron::to_strings).collect(), seed)
    }

    pub fn from_flats_and_lines(flats: &[[Point4; 3]], lines: &[Segment4], seed: Option<u64>) -> SceneFile {
        let mut objs: Vec<Vec<String>> = flats.iter().map(|[a, b, c]| strings(&[a, b, c])).collect();
        objs.extend(lines.iter().map(|e| strings(&[e.a(), e.b()])));
        SceneFile::new(SceneKind::FlatsAndLines, objs, seed)
    }
}

fn parse_segment(o: &[String]) -> Result<Segment4> {
    let [a, b] = points::<2>(o)?;
    Segment4::new(a, b)
}

/// Deterministic source of random objects with integer coordinates in `[-range, range]`.
pub struct SceneGen {
    rng: ChaCha8Rng,
    range: i64,
}

impl SceneGen {
    pub fn new(seed: u64, range: i64) -> SceneGen {
        SceneGen { rng: ChaCha8Rng::seed_from_u64(seed), range: range.max(1) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn coord(&mut self, r: i64) -> i64 {
        self.rng.gen_range(-r..=r)
    }

    pub fn point(&mut self) -> Point4 {
        let r = self.range;
        Point4::from_ints(std::array::from_fn(|_| self.coord(r)))
    }

    fn retry<T>(&mut self, what: &str, mut f: impl FnMut(&mut Self) -> Result<T>) -> Result<T> {
        for _ in 0..MAX_RETRIES {
            if let Ok(v) = f(self) {
                return Ok(v);
            }
        }
        Err(Error::RetriesExhausted(what.into()))
    }

    pub fn segment(&mut self) -> Result<Segment4> {
        self.retry("segment", |g| Segment4::new(g.point(), g.point()))
    }

    pub fn triangle(&mut self) -> Result<Triangle4> {
        self.retry("triangle", |g| Triangle4::new(g.point(), g.point(), g.point()))
    }

    pub fn tetrahedron(&mut self) -> Result<Tetrahedron4> {
        self.retry("tetrahedron", |g| Tetrahedron4::new(g.point(), g.point(), g.point(), g.point()))
    }

    /// Tetrahedron with vertices within `size` of a random center.
    pub fn local_tetrahedron(&mut self, size: i64) -> Result<Tetrahedron4> {
        let c = self.point();
        let size = size.max(1);
        self.retry("tetrahedron", |g| {
            let v: [Point4; 4] = std::array::from_fn(|_| {
                let off: [i64; 4] = std::array::from_fn(|_| g.coord(size));
                c.add_vec(&off.map(q))
            });
            let [a, b, c2, d] = v;
            Tetrahedron4::new(a, b, c2, d)
        })
    }

    /// A tetrahedron of size about a fifth of the range, moving over `[0, 1]`.
    pub fn moving_tetrahedron(&mut self) -> Result<MovingTetrahedron> {
        let r = self.range;
        let size = (r / 5).max(1);
        let speed = (r / 2).max(1);
        let c: [i64; 3] = std::array::from_fn(|_| self.coord(r));
        let u: [i64; 3] = std::array::from_fn(|_| self.coord(speed));
        self.retry("moving tetrahedron", |g| {
            let v: [[i64; 3]; 4] = std::array::from_fn(|_| std::array::from_fn(|k| c[k] + g.coord(size)));
            MovingTetrahedron::from_ints(v, u, 0, 1)
        })
    }

    /// A 2-flat through three random points.
    pub fn flat(&mut self) -> Result<[Point4; 3]> {
        self.retry("2-flat", |g| {
            let (a, b, c) = (g.point(), g.point(), g.point());
            if crate::kernel::collinear(&a, &b, &c) {
                return Err(Error::InvalidObject("collinear".into()));
            }
            Ok([a, b, c])
        })
    }

    /// A line through an integer point of `flat`.
    pub fn line_through(&mut self, flat: &[Point4; 3]) -> Result<Segment4> {
        let s = self.rng.gen_range(-2..=2i64);
        let t = self.rng.gen_range(-2..=2i64);
        let d1 = flat[1].sub(&flat[0]);
        let d2 = flat[2].sub(&flat[0]);
        let x = flat[0].add_vec(&std::array::from_fn(|i| &d1[i] * q(s) + &d2[i] * q(t)));
        self.retry("line", |g| {
            let d = g.point();
            Segment4::new(x.clone(), x.add_vec(d.coords()))
        })
    }

    /// `n` flats followed by `n` lines, about half of them through some flat.
    pub fn flats_and_lines(&mut self, n: usize) -> Result<(Vec<[Point4; 3]>, Vec<Segment4>)> {
        let flats: Vec<[Point4; 3]> = (0..n).map(|_| self.flat()).collect::<Result<_>>()?;
        let mut lines = Vec::with_capacity(n);
        for _ in 0..n {
            if self.rng.gen_bool(0.5) {
                let k = self.rng.gen_range(0..n);
                lines.push(self.line_through(&flats[k])?);
            } else {
                lines.push(self.segment()?);
            }
        }
        Ok((flats, lines))
    }
}

/// Generates a scene of `n` objects (`n` flats and `n` lines for `FlatsAndLines`).
pub fn generate(kind: SceneKind, n: usize, range: i64, seed: u64) -> Result<SceneFile> {
    if n == 0 {
        return Err(Error::OutOfRange("scene size must be at least 1".into()));
    }
    let mut g = SceneGen::new(seed, range);
    let s = Some(seed);
    Ok(match kind {
        SceneKind::Segments => SceneFile::from_segments(&(0..n).map(|_| g.segment()).collect::<Result<Vec<_>>>()?, s),
        SceneKind::Triangles => SceneFile::from_triangles(&(0..n).map(|_| g.triangle()).collect::<Result<Vec<_>>>()?, s),
        SceneKind::Tetrahedra => SceneFile::from_tetrahedra(&(0..n).map(|_| g.tetrahedron()).collect::<Result<Vec<_>>>()?, s),
        SceneKind::MovingTetrahedra => {
            SceneFile::from_moving(&(0..n).map(|_| g.moving_tetrahedron()).collect::<Result<Vec<_>>>()?, s)
        }
        SceneKind::FlatsAndLines => {
            let (f, l) = g.flats_and_lines(n)?;
            SceneFile::from_flats_and_lines(&f, &l, s)
        }
    })
}
