//! Outward-rounded `f64` intervals.

use num_traits::ToPrimitive;

use crate::kernel::ExactScalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v.next_down()
    }
}

fn up(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v.next_up()
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    /// Encloses an exact rational.
    pub fn of(v: &ExactScalar) -> Interval {
        match v.to_f64() {
            Some(f) if f.is_finite() => {
                if v.is_integer() && f.abs() < 9.0e15 {
                    Interval::point(f)
                } else {
                    Interval { lo: down(f), hi: up(f) }
                }
            }
            _ => Interval::entire(),
        }
    }

    pub fn of_i128(v: i128) -> Interval {
        let f = v as f64;
        if v.unsigned_abs() <= 1 << 53 {
            Interval::point(f)
        } else {
            Interval { lo: down(f), hi: up(f) }
        }
    }

    /// Encloses `n / d` for `d != 0`.
    pub fn ratio(n: i128, d: i128) -> Interval {
        let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
        Interval::of_i128(n).div_pos(Interval::of_i128(d))
    }

    /// Division by an interval of positive numbers.
    pub fn div_pos(self, o: Interval) -> Interval {
        debug_assert!(o.lo > 0.0);
        let (a, b, c, d) = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi);
        Interval {
            lo: down(a.min(b).min(c).min(d)),
            hi: up(a.max(b).max(c).max(d)),
        }
    }

    pub fn entire() -> Interval {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl std::ops::Mul for Interval {
    type Output = Interval;

    fn mul(self, o: Interval) -> Interval {
        let (a, b, c, d) = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi);
        if a.is_nan() || b.is_nan() || c.is_nan() || d.is_nan() {
            return Interval::entire();
        }
        Interval {
            lo: down(a.min(b).min(c).min(d)),
            hi: up(a.max(b).max(c).max(d)),
        }
    }
}
