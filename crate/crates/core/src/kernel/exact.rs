//! Fraction-free determinants and Cramer solves.
//!
//! Rational rows are scaled to integers first. Small integer inputs run through
//! a checked `i128` Bareiss elimination; overflow falls back to `BigInt`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ExactScalar, Sign};

pub(crate) const MAXN: usize = 8;

pub(crate) type SmallMatrix = [[i128; MAXN]; MAXN];

pub(crate) fn det_i128(mut m: SmallMatrix, n: usize) -> Option<i128> {
    if n == 0 {
        return Some(1);
    }
    let mut neg = false;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Some(0);
            };
            m.swap(k, p);
            neg = !neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j]
                    .checked_mul(m[k][k])?
                    .checked_sub(m[i][k].checked_mul(m[k][j])?)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    let d = m[n - 1][n - 1];
    Some(if neg { -d } else { d })
}

pub(crate) fn det_big(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut neg = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            neg = !neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if neg {
        -d
    } else {
        d
    }
}

fn widen(m: &SmallMatrix, n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(m[i][j])).collect())
        .collect()
}

pub(crate) fn det_small_sign(m: &SmallMatrix, n: usize) -> Sign {
    match det_i128(*m, n) {
        Some(d) => Sign::of_i128(d),
        None => Sign::of_big(&det_big(widen(m, n))),
    }
}

pub(crate) fn det_small(m: &SmallMatrix, n: usize) -> BigInt {
    match det_i128(*m, n) {
        Some(d) => BigInt::from(d),
        None => det_big(widen(m, n)),
    }
}

/// Solution of a square system as common-denominator numerators.
pub(crate) struct Cramer {
    pub num: Vec<BigInt>,
    pub den: BigInt,
}

impl Cramer {
    pub fn value(&self, i: usize) -> ExactScalar {
        ExactScalar::new(self.num[i].clone(), self.den.clone())
    }

    /// `0 <= x_i`, with `den > 0`.
    pub fn nonneg(&self, i: usize) -> bool {
        !self.num[i].is_negative()
    }

    /// `x_i <= 1`.
    pub fn at_most_one(&self, i: usize) -> bool {
        self.num[i] <= self.den
    }
}

fn normalize(mut num: Vec<BigInt>, mut den: BigInt) -> Cramer {
    if den.is_negative() {
        den = -den;
        for v in &mut num {
            *v = -&*v;
        }
    }
    Cramer { num, den }
}

/// Cramer solution held in `i128` when it fits.
pub(crate) enum Solved {
    Small([i128; MAXN], i128),
    Big(Cramer),
}

impl Solved {
    pub fn value(&self, i: usize) -> ExactScalar {
        match self {
            Solved::Small(num, den) => ExactScalar::new(BigInt::from(num[i]), BigInt::from(*den)),
            Solved::Big(c) => c.value(i),
        }
    }

    pub fn nonneg(&self, i: usize) -> bool {
        match self {
            Solved::Small(num, _) => num[i] >= 0,
            Solved::Big(c) => c.nonneg(i),
        }
    }

    pub fn at_most_one(&self, i: usize) -> bool {
        match self {
            Solved::Small(num, den) => num[i] <= *den,
            Solved::Big(c) => c.at_most_one(i),
        }
    }

    /// `sum_{i in idx} x_i <= 1`.
    pub fn sum_at_most_one(&self, idx: &[usize]) -> bool {
        match self {
            Solved::Small(num, den) => {
                let mut acc = 0i128;
                for &i in idx {
                    match acc.checked_add(num[i]) {
                        Some(v) => acc = v,
                        None => return idx.iter().map(|&i| BigInt::from(num[i])).sum::<BigInt>() <= BigInt::from(*den),
                    }
                }
                acc <= *den
            }
            Solved::Big(c) => idx.iter().map(|&i| &c.num[i]).sum::<BigInt>() <= c.den,
        }
    }
}

/// Like [`cramer_small`], staying in `i128` unless an intermediate overflows.
pub(crate) fn cramer_fast(a: &SmallMatrix, b: &[i128; MAXN], n: usize) -> Option<Solved> {
    let fast = (|| {
        let den = det_i128(*a, n)?;
        if den == 0 {
            return Some(None);
        }
        let mut num = [0i128; MAXN];
        for c in 0..n {
            let mut m = *a;
            for r in 0..n {
                m[r][c] = b[r];
            }
            num[c] = det_i128(m, n)?;
        }
        if den < 0 {
            for v in num.iter_mut().take(n) {
                *v = v.checked_neg()?;
            }
            return Some(Some(Solved::Small(num, den.checked_neg()?)));
        }
        Some(Some(Solved::Small(num, den)))
    })();
    match fast {
        Some(v) => v,
        None => cramer_small(a, b, n).map(Solved::Big),
    }
}

/// Solves `a x = b` for an `n x n` integer system. `None` when singular.
pub(crate) fn cramer_small(a: &SmallMatrix, b: &[i128; MAXN], n: usize) -> Option<Cramer> {
    let den = det_small(a, n);
    if den.is_zero() {
        return None;
    }
    let num = (0..n)
        .map(|c| {
            let mut m = *a;
            for r in 0..n {
                m[r][c] = b[r];
            }
            det_small(&m, n)
        })
        .collect();
    Some(normalize(num, den))
}

pub(crate) fn cramer_big(a: &[Vec<BigInt>], b: &[BigInt]) -> Option<Cramer> {
    let den = det_big(a.to_vec());
    if den.is_zero() {
        return None;
    }
    let n = a.len();
    let num = (0..n)
        .map(|c| {
            let mut m = a.to_vec();
            for r in 0..n {
                m[r][c] = b[r].clone();
            }
            det_big(m)
        })
        .collect();
    Some(normalize(num, den))
}

/// Scales a rational row by the lcm of its denominators.
pub(crate) fn integerize(row: &[ExactScalar]) -> Vec<BigInt> {
    let l = row
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter()
        .map(|x| x.numer() * (&l / x.denom()))
        .collect()
}

fn fits(v: &BigInt) -> Option<i128> {
    v.to_i64().map(i128::from)
}

fn to_small(rows: &[Vec<BigInt>], cols: usize) -> Option<SmallMatrix> {
    let mut m = [[0i128; MAXN]; MAXN];
    for (i, r) in rows.iter().enumerate() {
        for j in 0..cols {
            m[i][j] = fits(&r[j])?;
        }
    }
    Some(m)
}

/// Exact determinant sign of a square rational matrix.
pub fn det_sign(rows: &[Vec<ExactScalar>]) -> Sign {
    let n = rows.len();
    let ints: Vec<Vec<BigInt>> = rows.iter().map(|r| integerize(r)).collect();
    if n <= MAXN {
        if let Some(m) = to_small(&ints, n) {
            return det_small_sign(&m, n);
        }
    }
    Sign::of_big(&det_big(ints))
}

/// Exact determinant of a square rational matrix.
pub fn det(rows: &[Vec<ExactScalar>]) -> ExactScalar {
    let mut scale = BigInt::one();
    let ints: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let v = r.iter().map(|x| x.numer() * (&l / x.denom())).collect();
            scale *= l;
            v
        })
        .collect();
    let n = rows.len();
    let d = match (n <= MAXN).then(|| to_small(&ints, n)).flatten() {
        Some(m) => det_small(&m, n),
        None => det_big(ints),
    };
    ExactScalar::new(d, scale)
}

/// Exact solution of a square rational system, `None` when singular.
pub fn solve(a: &[Vec<ExactScalar>], b: &[ExactScalar]) -> Option<Vec<ExactScalar>> {
    let n = a.len();
    let rows: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut full = r.clone();
            full.push(bi.clone());
            integerize(&full)
        })
        .collect();
    let sol = if n <= MAXN {
        match to_small(&rows, n + 1) {
            Some(m) => {
                let mut rhs = [0i128; MAXN];
                let mut mat = [[0i128; MAXN]; MAXN];
                for i in 0..n {
                    rhs[i] = m[i][n];
                    mat[i][..n].copy_from_slice(&m[i][..n]);
                }
                cramer_small(&mat, &rhs, n)
            }
            None => cramer_from_rows(&rows, n),
        }
    } else {
        cramer_from_rows(&rows, n)
    }?;
    Some((0..n).map(|i| sol.value(i)).collect())
}

fn cramer_from_rows(rows: &[Vec<BigInt>], n: usize) -> Option<Cramer> {
    let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r[..n].to_vec()).collect();
    let b: Vec<BigInt> = rows.iter().map(|r| r[n].clone()).collect();
    cramer_big(&a, &b)
}

/// Row-reduces a rational matrix in place; returns pivot columns.
pub(crate) fn row_echelon(m: &mut [Vec<ExactScalar>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}
