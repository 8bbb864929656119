//! Exponents of the storage/query tradeoff and numeric unfolding of the cost recurrences.
//!
//! Costs are modelled with every `O*` factor set to 1. In [`Unfolding::Modeled`] the
//! per-level branching constants (`c0`, the factor 2 in the wide query recursion, `c`
//! in the main recursion) are treated as such factors and each recursion is charged the
//! largest level instead of the sum over levels, which drops the logarithmic level count.
//! [`Unfolding::Literal`] keeps all constants and sums every level.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

fn r(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

fn to_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn check_sigma(sigma: Rational64) -> Result<()> {
    if sigma < r(1, 1) || sigma > r(6, 1) {
        return Err(Error::OutOfRange(format!("sigma {sigma} outside [1, 6]")));
    }
    Ok(())
}

/// Query exponent for storage `s = n^sigma`.
pub fn q_tradeoff_exponent(sigma: Rational64) -> Result<Rational64> {
    check_sigma(sigma)?;
    Ok(if sigma <= r(2, 1) { r(7, 6) - sigma / 3 } else { r(3, 4) - sigma / 8 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchedExponents {
    /// `max(3mu/4 + 7/8, 1)`
    pub first: Rational64,
    /// `max(8mu/9 + 2/3, mu)`
    pub second: Rational64,
    pub total: Rational64,
    pub first_dominates: bool,
}

/// Exponent of the batched red/blue cost for `m = n^mu` red objects against `n` blue ones.
pub fn batched_cost_exponents(mu: Rational64) -> Result<BatchedExponents> {
    if mu < r(0, 1) {
        return Err(Error::OutOfRange(format!("mu {mu} is negative")));
    }
    let first = (mu * r(3, 4) + r(7, 8)).max(r(1, 1));
    let second = (mu * r(8, 9) + r(2, 3)).max(mu);
    Ok(BatchedExponents { first, second, total: first.max(second), first_dominates: first >= second })
}

/// Where the two leading terms of the batched bound cross.
pub fn batched_breakpoint() -> Rational64 {
    (r(7, 8) - r(2, 3)) / (r(8, 9) - r(3, 4))
}

/// `n^{6/5} / s^{1/5}`
pub fn leaf_size(n: f64, s: f64) -> Result<f64> {
    check_budget(n, s)?;
    Ok((1.2 * n.ln() - 0.2 * s.ln()).exp())
}

/// Exponent of `leaf_size` in `n` for `s = n^sigma`.
pub fn leaf_size_exponent(sigma: Rational64) -> Result<Rational64> {
    check_sigma(sigma)?;
    Ok(r(6, 5) - sigma / 5)
}

/// `(s/n)^{(6/5) / (1 + 6 delta / 5)}`
pub fn stop_r_omega(n: f64, s: f64, delta: f64) -> Result<f64> {
    check_budget(n, s)?;
    if !(delta > 0.0 && delta < 1.0 / 6.0) {
        return Err(Error::OutOfRange(format!("delta {delta} outside (0, 1/6)")));
    }
    Ok(((s / n).ln() * 1.2 / (1.0 + 1.2 * delta)).exp())
}

fn check_budget(n: f64, s: f64) -> Result<()> {
    if !(n >= 1.0 && s >= n && s.ln() <= 6.0 * n.ln() + 1e-9) {
        return Err(Error::OutOfRange(format!("s = {s} outside [n, n^6] for n = {n}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub d: Rational64,
    pub r0: Rational64,
    pub c0: Rational64,
    pub delta: Rational64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { d: r(8, 1), r0: r(64, 1), c0: r(4, 1), delta: r(1, 100) }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::OutOfRange(m.to_string()));
        if self.d <= r(1, 1) {
            return bad("D must exceed 1");
        }
        if self.r0 < self.d * 4 {
            return bad("r0 must be at least 4 D");
        }
        if self.c0 <= r(0, 1) {
            return bad("c0 must be positive");
        }
        if self.delta <= r(0, 1) || self.delta >= r(1, 6) {
            return bad("delta must lie in (0, 1/6)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unfolding {
    Modeled,
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    /// Largest deviation of `ln cost` from the fitted line.
    pub residual: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_exponent(samples: &[(f64, f64)]) -> ExponentFit {
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residual = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).abs()).fold(0.0, f64::max);
    ExponentFit { exponent: slope, residual }
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn power_grid(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e as i32)).collect()
}

fn combine(mode: Unfolding, acc: f64, x: f64) -> f64 {
    match mode {
        Unfolding::Modeled => acc.max(x),
        Unfolding::Literal => acc + x,
    }
}

/// Storage and query cost of the wide-tetrahedra structure on `nw` tetrahedra with
/// storage parameter `sw`; recursion stops once `nw < stop`.
pub fn wide_costs(nw: f64, sw: f64, stop: f64, model: &CostModel, mode: Unfolding) -> (f64, f64) {
    let r0 = to_f64(model.r0);
    let (c0, two) = match mode {
        Unfolding::Modeled => (1.0, 1.0),
        Unfolding::Literal => (to_f64(model.c0), 2.0),
    };
    let (mut storage, mut query) = (0.0, 0.0);
    let (mut n, mut s) = (nw, sw);
    let (mut copies_s, mut copies_q) = (1.0, 1.0);
    while n >= stop && n > 1.0 {
        storage = combine(mode, storage, copies_s * r0.powi(6) * s);
        query = combine(mode, query, copies_q * (1.0 + n / s.powf(0.25)));
        copies_s *= c0 * r0.powi(3);
        copies_q *= two;
        n /= r0;
        s /= r0.powi(3);
    }
    (combine(mode, storage, copies_s * n), combine(mode, query, copies_q * n))
}

/// Stopping size `n^{3/2} / s^{1/2}` of the wide recursion.
pub fn wide_stop(n: f64, s: f64) -> f64 {
    n.powf(1.5) / s.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostFits {
    pub storage: ExponentFit,
    pub query: ExponentFit,
}

fn fits(ns: &[f64], cost: impl Fn(f64) -> (f64, f64)) -> CostFits {
    let c: Vec<(f64, f64, f64)> = ns.iter().map(|&n| { let (s, q) = cost(n); (n, s, q) }).collect();
    CostFits {
        storage: fit_exponent(&c.iter().map(|x| (x.0, x.1)).collect::<Vec<_>>()),
        query: fit_exponent(&c.iter().map(|x| (x.0, x.2)).collect::<Vec<_>>()),
    }
}

/// Growth of the wide structure's storage and query cost at `s = n^sigma`.
pub fn unfold_wide(ns: &[f64], sigma: f64, model: &CostModel, mode: Unfolding) -> Result<CostFits> {
    model.validate()?;
    check_sigma(Rational64::approximate_float(sigma).unwrap_or_default())?;
    Ok(fits(ns, |n| {
        let s = n.powf(sigma);
        wide_costs(n, s, wide_stop(n, s), model, mode)
    }))
}

/// Plug-in bounds for segments lying on the zero set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroSetCosts {
    pub storage: bool,
    pub query: bool,
}

impl Default for ZeroSetCosts {
    fn default() -> Self {
        ZeroSetCosts { storage: true, query: true }
    }
}

/// Storage and query cost of the full structure on `n` tetrahedra.
pub fn main_costs(n: f64, model: &CostModel, mode: Unfolding, zero_set: ZeroSetCosts) -> (f64, f64) {
    let d = to_f64(model.d);
    let c = match mode {
        Unfolding::Modeled => 1.0,
        Unfolding::Literal => to_f64(model.c0),
    };
    let wide = |m: f64| {
        let s = m * m;
        wide_costs(m, s, wide_stop(m, s), model, mode)
    };
    let (mut storage, mut query) = (0.0, 0.0);
    let mut m = n;
    let (mut copies_s, mut copies_q) = (1.0, 1.0);
    while m > 1.0 {
        let (s0, q0) = wide(m / d);
        let s1 = if zero_set.storage { m * m } else { 0.0 };
        storage = combine(mode, storage, copies_s * (s0 + s1));
        query = combine(mode, query, copies_q * q0);
        if zero_set.query {
            query = query.max(copies_q * m.sqrt());
        }
        copies_s *= c * d.powi(4);
        copies_q *= c * d;
        m /= d * d;
    }
    (combine(mode, storage, copies_s * m), combine(mode, query, copies_q * m))
}

pub fn unfold_main(ns: &[f64], model: &CostModel, mode: Unfolding, zero_set: ZeroSetCosts) -> Result<CostFits> {
    model.validate()?;
    Ok(fits(ns, |n| main_costs(n, model, mode, zero_set)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrematureExponent {
    pub exponent: f64,
    /// Exponent of `D^k` in `n` at the chosen balance.
    pub dk_exponent: f64,
    /// Recursion depth `k` realising that `D^k`, as a real number.
    pub depth: f64,
    /// Whether the first and last terms were balanced (otherwise the second and last).
    pub balanced_first: bool,
}

/// Largest term of `D^k + n^{5/4} D^{k/6} / s^{5/12} + n / s^{1/4} + n / (s^{1/6} D^{k/3})`.
fn premature_cost(n: f64, s: f64, dk: f64) -> f64 {
    [dk, n.powf(1.25) * dk.powf(1.0 / 6.0) / s.powf(5.0 / 12.0), n / s.powf(0.25), n / (s.powf(1.0 / 6.0) * dk.powf(1.0 / 3.0))]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Query exponent of the structure that stops the partition recursion early, at the
/// better of `D^k = sqrt(s/n)` and `D^k = n^{3/4} / s^{1/8}`.
pub fn unfold_premature(n: f64, sigma: f64, model: &CostModel) -> Result<PrematureExponent> {
    model.validate()?;
    check_sigma(Rational64::approximate_float(sigma).unwrap_or_default())?;
    let s = n.powf(sigma);
    let ln_n = n.ln();
    let d = to_f64(model.d);
    [((s / n).sqrt(), false), (n.powf(0.75) / s.powf(0.125), true)]
        .into_iter()
        .map(|(dk, balanced_first)| PrematureExponent {
            exponent: premature_cost(n, s, dk).ln() / ln_n,
            dk_exponent: dk.ln() / ln_n,
            depth: dk.ln() / d.ln(),
            balanced_first,
        })
        .min_by(|a, b| a.exponent.total_cmp(&b.exponent))
        .ok_or_else(|| Error::OutOfRange("no balance".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TradeoffSample {
    pub sigma: f64,
    pub exponent: f64,
    pub premature: f64,
}

/// Tradeoff curve sampled at `sigma = 1, 1 + step, ..., 6`.
pub fn tradeoff_curve(step: Rational64, n: f64, model: &CostModel) -> Result<Vec<TradeoffSample>> {
    if step <= r(0, 1) {
        return Err(Error::OutOfRange("step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut sigma = r(1, 1);
    while sigma <= r(6, 1) {
        out.push(TradeoffSample {
            sigma: to_f64(sigma),
            exponent: to_f64(q_tradeoff_exponent(sigma)?),
            premature: unfold_premature(n, to_f64(sigma), model)?.exponent,
        });
        sigma += step;
    }
    Ok(out)
}
