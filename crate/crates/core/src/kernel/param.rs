use num_traits::{One, Zero};

use super::types::{q, ExactScalar, Point4, Segment4, Sign};
use crate::error::{Error, Result};

/// A line through its crossings with `w = 0` and `w = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LineParam {
    pub u0: Point4,
    pub u1: Point4,
}

impl LineParam {
    /// `(x0, y0, z0, x1, y1, z1)`.
    pub fn point6(&self) -> [ExactScalar; 6] {
        let [a, b, c, _] = self.u0.coords().clone();
        let [d, e, f, _] = self.u1.coords().clone();
        [a, b, c, d, e, f]
    }
}

pub fn line_param(s: &Segment4) -> Result<LineParam> {
    let (a, b) = (s.a(), s.b());
    let dw = b.w() - a.w();
    if dw.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let t0 = -a.w() / &dw;
    let t1 = (ExactScalar::one() - a.w()) / &dw;
    Ok(LineParam {
        u0: a.lerp(b, &t0),
        u1: a.lerp(b, &t1),
    })
}

/// A 2-plane through its meets with `x=y=0`, `x=0,y=1` and `x=y=1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoPlaneParam {
    pub v00: (ExactScalar, ExactScalar),
    pub v01: (ExactScalar, ExactScalar),
    pub v11: (ExactScalar, ExactScalar),
}

pub(crate) const ANCHOR_XY: [(i64, i64); 3] = [(0, 0), (0, 1), (1, 1)];

impl TwoPlaneParam {
    /// `(z00, w00, z01, w01, z11, w11)`.
    pub fn point6(&self) -> [ExactScalar; 6] {
        [
            self.v00.0.clone(),
            self.v00.1.clone(),
            self.v01.0.clone(),
            self.v01.1.clone(),
            self.v11.0.clone(),
            self.v11.1.clone(),
        ]
    }

    pub fn anchors(&self) -> [Point4; 3] {
        let zw = [&self.v00, &self.v01, &self.v11];
        std::array::from_fn(|k| {
            let (x, y) = ANCHOR_XY[k];
            Point4::new(q(x), q(y), zw[k].0.clone(), zw[k].1.clone())
        })
    }
}

fn xy_orient(p: &Point4, q: &Point4, r: &Point4) -> ExactScalar {
    (q.x() - p.x()) * (r.y() - p.y()) - (r.x() - p.x()) * (q.y() - p.y())
}

pub fn twoplane_param(p: &Point4, q: &Point4, r: &Point4) -> Result<TwoPlaneParam> {
    let delta = xy_orient(p, q, r);
    if delta.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let d1 = q.sub(p);
    let d2 = r.sub(p);
    let anchor = |(x, y): (i64, i64)| {
        let bx = super::types::q(x) - p.x();
        let by = super::types::q(y) - p.y();
        let s = (&bx * &d2[1] - &d2[0] * &by) / &delta;
        let t = (&d1[0] * &by - &bx * &d1[1]) / &delta;
        let z = p.z() + &s * &d1[2] + &t * &d2[2];
        let w = p.w() + &s * &d1[3] + &t * &d2[3];
        (z, w)
    };
    Ok(TwoPlaneParam {
        v00: anchor(ANCHOR_XY[0]),
        v01: anchor(ANCHOR_XY[1]),
        v11: anchor(ANCHOR_XY[2]),
    })
}

/// Sign of the affine map taking `(p, q, r)` to the anchor frame.
///
/// `orient5(x, y, anchors) = lambda * orient5(x, y, p, q, r)` with `sign(lambda)` returned here.
pub fn twoplane_frame_sign(p: &Point4, q: &Point4, r: &Point4) -> Sign {
    -Sign::of(&xy_orient(p, q, r))
}
