//! Range polynomials over parameter space and conservative box classification.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::interval::Interval;
use crate::kernel::exact::{self, SmallMatrix, MAXN};
use crate::kernel::{q, ExactScalar, Point4};

pub const MAX_DIM: usize = 6;

/// Axis-aligned box in parameter space, stored as an outward `f64` enclosure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBox {
    pub dim: usize,
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
}

impl ParamBox {
    pub fn empty(dim: usize) -> ParamBox {
        ParamBox { dim, lo: [f64::INFINITY; MAX_DIM], hi: [f64::NEG_INFINITY; MAX_DIM] }
    }

    pub fn of_point(p: &[Interval; MAX_DIM], dim: usize) -> ParamBox {
        let mut b = ParamBox::empty(dim);
        b.include(p);
        b
    }

    pub fn include(&mut self, p: &[Interval; MAX_DIM]) {
        for d in 0..self.dim {
            self.lo[d] = self.lo[d].min(p[d].lo);
            self.hi[d] = self.hi[d].max(p[d].hi);
        }
    }

    /// Encloses the box with the given exact corners.
    pub fn from_rational_corners(lo: &[ExactScalar], hi: &[ExactScalar]) -> ParamBox {
        let dim = lo.len();
        let mut b = ParamBox::empty(dim);
        for d in 0..dim {
            b.lo[d] = Interval::of(&lo[d]).lo;
            b.hi[d] = Interval::of(&hi[d]).hi;
        }
        b
    }

    pub fn side(&self, d: usize) -> Interval {
        Interval { lo: self.lo[d], hi: self.hi[d] }
    }
}

pub fn enclose(v: &[ExactScalar]) -> [Interval; MAX_DIM] {
    let mut out = [Interval::ZERO; MAX_DIM];
    for (o, x) in out.iter_mut().zip(v) {
        *o = Interval::of(x);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BoxClass {
    Inside,
    Outside,
    Crossing,
}

/// A polynomial affine in each group of parameter coordinates.
///
/// Within a group at most one coordinate appears per monomial; coefficients
/// are indexed by one option per group (0 = constant, `k` = k-th coordinate).
#[derive(Clone, Debug)]
pub struct RangeForm {
    groups: Vec<Vec<usize>>,
    strides: Vec<usize>,
    coef: Vec<ExactScalar>,
    enc: Vec<Interval>,
}

impl RangeForm {
    pub fn new(groups: Vec<Vec<usize>>, coef: Vec<ExactScalar>) -> RangeForm {
        let mut strides = vec![1; groups.len()];
        for g in (0..groups.len().saturating_sub(1)).rev() {
            strides[g] = strides[g + 1] * (groups[g + 1].len() + 1);
        }
        let total: usize = groups.iter().map(|g| g.len() + 1).product();
        assert_eq!(coef.len(), total, "coefficient tensor size");
        let enc = coef.iter().map(Interval::of).collect();
        RangeForm { groups, strides, coef, enc }
    }

    /// `constant + sum_i coeffs[i] * x_dims[i]`.
    pub fn linear(dims: &[usize], constant: ExactScalar, coeffs: &[ExactScalar]) -> RangeForm {
        let mut coef = vec![constant];
        coef.extend_from_slice(coeffs);
        RangeForm::new(vec![dims.to_vec()], coef)
    }

    /// Determinant of five rows, some of which are affine in parameter groups.
    pub fn det5(rows: &[RowSpec; 5]) -> RangeForm {
        let var_rows: Vec<usize> = (0..5).filter(|&i| matches!(rows[i], RowSpec::Var { .. })).collect();
        let groups: Vec<Vec<usize>> = var_rows
            .iter()
            .map(|&i| match &rows[i] {
                RowSpec::Var { vars, .. } => vars.iter().map(|(d, _)| *d).collect(),
                RowSpec::Fixed(_) => unreachable!(),
            })
            .collect();
        let sizes: Vec<usize> = groups.iter().map(|g| g.len() + 1).collect();
        let total: usize = sizes.iter().product();
        let mut coef = Vec::with_capacity(total);
        let mut choice = vec![0usize; groups.len()];
        for _ in 0..total {
            let m: [&[ExactScalar; 5]; 5] = std::array::from_fn(|i| match &rows[i] {
                RowSpec::Fixed(r) => r,
                RowSpec::Var { base, vars } => {
                    let g = var_rows.iter().position(|&v| v == i).expect("var row");
                    match choice[g] {
                        0 => base,
                        k => &vars[k - 1].1,
                    }
                }
            });
            coef.push(det5_exact(&m));
            for g in (0..choice.len()).rev() {
                choice[g] += 1;
                if choice[g] < sizes[g] {
                    break;
                }
                choice[g] = 0;
            }
        }
        RangeForm::new(groups, coef)
    }

    pub fn degree(&self) -> usize {
        self.groups.len()
    }

    /// Interval enclosure of the polynomial over a box.
    pub fn eval_box(&self, b: &ParamBox) -> Interval {
        self.rec(0, 0, b)
    }

    fn rec(&self, g: usize, off: usize, b: &ParamBox) -> Interval {
        if g == self.groups.len() {
            return self.enc[off];
        }
        let stride = self.strides[g];
        let mut acc = self.rec(g + 1, off, b);
        for (k, &d) in self.groups[g].iter().enumerate() {
            let inner = self.rec(g + 1, off + (k + 1) * stride, b);
            acc = acc + inner * b.side(d);
        }
        acc
    }

    /// Exact value at a rational parameter point.
    pub fn eval_exact(&self, x: &[ExactScalar]) -> ExactScalar {
        self.rec_exact(0, 0, x)
    }

    fn rec_exact(&self, g: usize, off: usize, x: &[ExactScalar]) -> ExactScalar {
        if g == self.groups.len() {
            return self.coef[off].clone();
        }
        let stride = self.strides[g];
        let mut acc = self.rec_exact(g + 1, off, x);
        for (k, &d) in self.groups[g].iter().enumerate() {
            acc += self.rec_exact(g + 1, off + (k + 1) * stride, x) * &x[d];
        }
        acc
    }
}

/// `Inside` when `mult * f > 0` on the whole box, `Outside` when `mult * f < 0` on it.
pub fn classify_box(b: &ParamBox, f: &RangeForm, mult: i8) -> BoxClass {
    let mut iv = f.eval_box(b);
    if mult < 0 {
        iv = -iv;
    }
    if iv.lo > 0.0 {
        BoxClass::Inside
    } else if iv.hi < 0.0 {
        BoxClass::Outside
    } else {
        BoxClass::Crossing
    }
}

/// One row of a 5x5 determinant.
#[derive(Clone, Debug)]
pub enum RowSpec {
    Fixed([ExactScalar; 5]),
    /// `base + sum x_d * vec_d`.
    Var { base: [ExactScalar; 5], vars: Vec<(usize, [ExactScalar; 5])> },
}

impl RowSpec {
    pub fn point(p: &Point4) -> RowSpec {
        let c = p.coords();
        RowSpec::Fixed([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone(), q(1)])
    }

    /// Anchor `k` of a 2-plane: `(X, Y, z, w, 1)` with `(z, w)` at dims `2k, 2k+1`.
    pub fn anchor(k: usize, x: i64, y: i64) -> RowSpec {
        RowSpec::Var {
            base: [q(x), q(y), q(0), q(0), q(1)],
            vars: vec![(2 * k, unit(2)), (2 * k + 1, unit(3))],
        }
    }

    /// Line anchor at `w = level` with `(x, y, z)` at dims `first..first+3`.
    pub fn line_anchor(first: usize, level: i64) -> RowSpec {
        RowSpec::Var {
            base: [q(0), q(0), q(0), q(level), q(1)],
            vars: (0..3).map(|i| (first + i, unit(i))).collect(),
        }
    }
}

fn unit(i: usize) -> [ExactScalar; 5] {
    std::array::from_fn(|j| q((i == j) as i64))
}

fn det5_exact(m: &[&[ExactScalar; 5]; 5]) -> ExactScalar {
    let mut s: SmallMatrix = [[0; MAXN]; MAXN];
    let mut small = true;
    'rows: for i in 0..5 {
        for j in 0..5 {
            let v = &m[i][j];
            match (v.is_integer(), v.numer().to_i64()) {
                (true, Some(x)) if x.abs() < (1 << 62) => s[i][j] = x as i128,
                _ => {
                    small = false;
                    break 'rows;
                }
            }
        }
    }
    if small {
        return ExactScalar::from_integer(exact::det_small(&s, 5));
    }
    let rows: Vec<Vec<ExactScalar>> = m.iter().map(|r| r.to_vec()).collect();
    let d = exact::det(&rows);
    if d.is_zero() {
        ExactScalar::zero()
    } else {
        d
    }
}
