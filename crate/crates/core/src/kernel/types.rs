use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::exact::{self, SmallMatrix, MAXN};
use crate::error::{Error, Result};

pub type ExactScalar = BigRational;

pub fn q(v: i64) -> ExactScalar {
    ExactScalar::from_integer(BigInt::from(v))
}

pub fn qr(n: i64, d: i64) -> ExactScalar {
    ExactScalar::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_scalar(s: &str) -> Result<ExactScalar> {
    let t = s.trim();
    let bad = || Error::Schema(format!("not a rational: {s:?}"));
    let v = match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            ExactScalar::new(n, d)
        }
        None => ExactScalar::from_integer(BigInt::from_str(t).map_err(|_| bad())?),
    };
    Ok(v)
}

pub fn format_scalar(v: &ExactScalar) -> String {
    v.to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of_i128(v: i128) -> Sign {
        match v.signum() {
            -1 => Sign::Neg,
            0 => Sign::Zero,
            _ => Sign::Pos,
        }
    }

    pub fn of_big(v: &BigInt) -> Sign {
        if v.is_zero() {
            Sign::Zero
        } else if v.is_negative() {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn of(v: &ExactScalar) -> Sign {
        Sign::of_big(v.numer())
    }

    pub fn from_i8(v: i8) -> Sign {
        Sign::of_i128(v as i128)
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        Sign::from_i8(self.to_i8() * o.to_i8())
    }
}

const SMALL_BOUND: i64 = 1 << 62;

fn small_of(c: &[ExactScalar; 4]) -> Option<[i64; 4]> {
    let mut out = [0i64; 4];
    for (o, v) in out.iter_mut().zip(c) {
        if !v.is_integer() {
            return None;
        }
        let x = v.numer().to_i64()?;
        if x.abs() >= SMALL_BOUND {
            return None;
        }
        *o = x;
    }
    Some(out)
}

/// A point of R^4 with exact rational coordinates `(x, y, z, w)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point4 {
    c: [ExactScalar; 4],
    small: Option<[i64; 4]>,
}

impl Point4 {
    pub fn new(x: ExactScalar, y: ExactScalar, z: ExactScalar, w: ExactScalar) -> Point4 {
        Point4::from_array([x, y, z, w])
    }

    pub fn from_array(c: [ExactScalar; 4]) -> Point4 {
        let small = small_of(&c);
        Point4 { c, small }
    }

    pub fn from_ints(v: [i64; 4]) -> Point4 {
        Point4::from_array(v.map(q))
    }

    pub fn origin() -> Point4 {
        Point4::from_ints([0; 4])
    }

    pub fn x(&self) -> &ExactScalar {
        &self.c[0]
    }
    pub fn y(&self) -> &ExactScalar {
        &self.c[1]
    }
    pub fn z(&self) -> &ExactScalar {
        &self.c[2]
    }
    pub fn w(&self) -> &ExactScalar {
        &self.c[3]
    }

    pub fn coords(&self) -> &[ExactScalar; 4] {
        &self.c
    }

    /// Integer coordinates when all four are integers of moderate size.
    pub fn small(&self) -> Option<&[i64; 4]> {
        self.small.as_ref()
    }

    pub fn sub(&self, o: &Point4) -> [ExactScalar; 4] {
        std::array::from_fn(|i| &self.c[i] - &o.c[i])
    }

    pub fn add_vec(&self, v: &[ExactScalar; 4]) -> Point4 {
        Point4::from_array(std::array::from_fn(|i| &self.c[i] + &v[i]))
    }

    /// `self + t (o - self)`.
    pub fn lerp(&self, o: &Point4, t: &ExactScalar) -> Point4 {
        Point4::from_array(std::array::from_fn(|i| &self.c[i] + t * (&o.c[i] - &self.c[i])))
    }

    pub fn to_f64(&self) -> [f64; 4] {
        self.c.each_ref().map(|v| v.to_f64().unwrap_or(f64::NAN))
    }

    pub fn to_strings(&self) -> [String; 4] {
        self.c.each_ref().map(format_scalar)
    }

    pub fn parse(s: &[impl AsRef<str>]) -> Result<Point4> {
        if s.len() != 4 {
            return Err(Error::Schema(format!("point needs 4 coordinates, got {}", s.len())));
        }
        let mut c = Vec::with_capacity(4);
        for v in s {
            c.push(parse_scalar(v.as_ref())?);
        }
        Ok(Point4::from_array(c.try_into().expect("length checked")))
    }

    pub(crate) fn hrow(&self) -> Vec<ExactScalar> {
        let mut r = self.c.to_vec();
        r.push(ExactScalar::one());
        r
    }
}

impl fmt::Debug for Point4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z, w] = &self.c;
        write!(f, "({x}, {y}, {z}, {w})")
    }
}

impl Serialize for Point4 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point4 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Point4, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        Point4::parse(&v).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn collinear(p: &Point4, q: &Point4, r: &Point4) -> bool {
    let a = q.sub(p);
    let b = r.sub(p);
    (0..4).all(|i| (i + 1..4).all(|j| (&a[i] * &b[j] - &a[j] * &b[i]).is_zero()))
}

/// A closed segment with distinct endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment4 {
    a: Point4,
    b: Point4,
}

impl Segment4 {
    pub fn new(a: Point4, b: Point4) -> Result<Segment4> {
        if a == b {
            return Err(Error::InvalidObject("segment endpoints coincide".into()));
        }
        Ok(Segment4 { a, b })
    }

    pub fn a(&self) -> &Point4 {
        &self.a
    }
    pub fn b(&self) -> &Point4 {
        &self.b
    }

    pub fn direction(&self) -> [ExactScalar; 4] {
        self.b.sub(&self.a)
    }
}

/// A closed triangle spanned by three affinely independent points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triangle4 {
    v: [Point4; 3],
}

impl Triangle4 {
    pub fn new(p: Point4, q: Point4, r: Point4) -> Result<Triangle4> {
        if collinear(&p, &q, &r) {
            return Err(Error::InvalidObject("triangle vertices are collinear".into()));
        }
        Ok(Triangle4 { v: [p, q, r] })
    }

    pub fn p(&self) -> &Point4 {
        &self.v[0]
    }
    pub fn q(&self) -> &Point4 {
        &self.v[1]
    }
    pub fn r(&self) -> &Point4 {
        &self.v[2]
    }

    pub fn vertices(&self) -> &[Point4; 3] {
        &self.v
    }

    /// Edges in cyclic vertex order: `pq`, `qr`, `rp`.
    pub fn edges(&self) -> [(&Point4, &Point4); 3] {
        [(&self.v[0], &self.v[1]), (&self.v[1], &self.v[2]), (&self.v[2], &self.v[0])]
    }
}

/// A hyperplane `coeffs . x = offset`, first nonzero coefficient equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperplane4 {
    coeffs: [ExactScalar; 4],
    offset: ExactScalar,
    small: Option<([i64; 4], i64)>,
}

impl Hyperplane4 {
    /// Normalizes an arbitrary nonzero equation.
    pub fn new(coeffs: [ExactScalar; 4], offset: ExactScalar) -> Result<Hyperplane4> {
        let Some(lead) = coeffs.iter().find(|c| !c.is_zero()).cloned() else {
            return Err(Error::InvalidObject("hyperplane with zero normal".into()));
        };
        let coeffs = coeffs.map(|c| c / &lead);
        let offset = offset / &lead;
        let mut row = coeffs.to_vec();
        row.push(offset.clone());
        let ints = exact::integerize(&row);
        let small = ints
            .iter()
            .map(|v| v.to_i64().filter(|x| x.abs() < SMALL_BOUND))
            .collect::<Option<Vec<_>>>()
            .map(|v| ([v[0], v[1], v[2], v[3]], v[4]));
        Ok(Hyperplane4 { coeffs, offset, small })
    }

    pub fn coeffs(&self) -> &[ExactScalar; 4] {
        &self.coeffs
    }

    pub fn offset(&self) -> &ExactScalar {
        &self.offset
    }

    /// Positive integer multiple of the equation, when it fits.
    pub(crate) fn small(&self) -> Option<&([i64; 4], i64)> {
        self.small.as_ref()
    }

    /// `coeffs . p - offset`.
    pub fn eval(&self, p: &Point4) -> ExactScalar {
        let mut acc = -self.offset.clone();
        for i in 0..4 {
            acc += &self.coeffs[i] * &p.coords()[i];
        }
        acc
    }

    /// The 5 parameters `(a1, a2, a3, a4, b)`.
    pub fn params(&self) -> [ExactScalar; 5] {
        let [a, b, c, d] = self.coeffs.clone();
        [a, b, c, d, self.offset.clone()]
    }
}

/// A tetrahedron spanning a 3-flat in R^4.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tetrahedron4 {
    v: [Point4; 4],
    plane: Hyperplane4,
    facet_sign: [Sign; 4],
}

/// Vertex indices of facet `k`, the triangle opposite vertex `k`.
pub(crate) const FACETS: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

impl Tetrahedron4 {
    pub fn new(v0: Point4, v1: Point4, v2: Point4, v3: Point4) -> Result<Tetrahedron4> {
        let v = [v0, v1, v2, v3];
        let plane = plane_through(&v)?;
        // Probe line through the centroid along the normal; positive multiples
        // of the centroid row keep the determinant sign.
        let four = q(4);
        let mut centroid = vec![ExactScalar::zero(); 4];
        for p in &v {
            for i in 0..4 {
                centroid[i] += &p.coords()[i];
            }
        }
        centroid.push(four);
        let mut normal = plane.coeffs().to_vec();
        normal.push(ExactScalar::zero());
        let facet_sign = FACETS.map(|f| {
            let rows = vec![
                centroid.clone(),
                normal.clone(),
                v[f[0]].hrow(),
                v[f[1]].hrow(),
                v[f[2]].hrow(),
            ];
            exact::det_sign(&rows)
        });
        debug_assert!(facet_sign.iter().all(|s| !s.is_zero()));
        Ok(Tetrahedron4 { v, plane, facet_sign })
    }

    pub fn vertices(&self) -> &[Point4; 4] {
        &self.v
    }

    pub fn hyperplane(&self) -> &Hyperplane4 {
        &self.plane
    }

    pub fn facet(&self, k: usize) -> [&Point4; 3] {
        FACETS[k].map(|i| &self.v[i])
    }

    /// Orientation of facet `k` seen from the interior probe line directed along the normal.
    pub fn facet_sign(&self, k: usize) -> Sign {
        self.facet_sign[k]
    }

    /// The six edges as vertex index pairs.
    pub fn edges(&self) -> [(&Point4, &Point4); 6] {
        EDGES.map(|(i, j)| (&self.v[i], &self.v[j]))
    }

    /// The four 2-faces (facets).
    pub fn faces(&self) -> [Triangle4; 4] {
        FACETS.map(|f| Triangle4 {
            v: f.map(|i| self.v[i].clone()),
        })
    }
}

pub(crate) const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub(crate) fn plane_through(v: &[Point4; 4]) -> Result<Hyperplane4> {
    let e: Vec<[ExactScalar; 4]> = (1..4).map(|i| v[i].sub(&v[0])).collect();
    let mut normal: [ExactScalar; 4] = std::array::from_fn(|_| ExactScalar::zero());
    for (k, nk) in normal.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..4).filter(|&c| c != k).collect();
        let minor: Vec<Vec<ExactScalar>> = e
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let d = small_minor(&minor).unwrap_or_else(|| exact::det(&minor));
        *nk = if k % 2 == 0 { d } else { -d };
    }
    if normal.iter().all(Zero::is_zero) {
        return Err(Error::DegenerateTetrahedron);
    }
    let mut offset = ExactScalar::zero();
    for i in 0..4 {
        offset += &normal[i] * &v[0].coords()[i];
    }
    Hyperplane4::new(normal, offset)
}

fn small_minor(m: &[Vec<ExactScalar>]) -> Option<ExactScalar> {
    let mut s: SmallMatrix = [[0; MAXN]; MAXN];
    for i in 0..3 {
        for j in 0..3 {
            let v = &m[i][j];
            if !v.is_integer() {
                return None;
            }
            s[i][j] = v.numer().to_i64()? as i128;
        }
    }
    Some(ExactScalar::from_integer(exact::det_small(&s, 3)))
}
