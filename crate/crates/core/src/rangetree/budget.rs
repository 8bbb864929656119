use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Storage target `s` for a structure over `n` objects, `n <= s <= n^6`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageBudget {
    pub n: u64,
    pub s: u128,
}

fn pow6(n: u64) -> BigUint {
    BigUint::from(n).pow(6)
}

impl StorageBudget {
    pub fn new(n: u64, s: u128) -> Result<StorageBudget> {
        if BigUint::from(s) < BigUint::from(n) || BigUint::from(s) > pow6(n) {
            return Err(Error::BudgetOutOfRange { n, s });
        }
        Ok(StorageBudget { n, s })
    }

    /// `s = n^sigma` for `sigma` in `[1, 6]`, rounded and clamped into range.
    pub fn from_sigma(n: u64, sigma: f64) -> Result<StorageBudget> {
        if !(1.0..=6.0).contains(&sigma) {
            return Err(Error::OutOfRange(format!("sigma {sigma} outside [1, 6]")));
        }
        let max = pow6(n).to_u128().unwrap_or(u128::MAX);
        let s = if sigma.fract() == 0.0 {
            BigUint::from(n).pow(sigma as u32).to_u128().unwrap_or(u128::MAX)
        } else {
            let v = (n as f64).powf(sigma).round();
            if v >= u128::MAX as f64 { u128::MAX } else { v as u128 }
        };
        Ok(StorageBudget { n, s: s.clamp(n as u128, max.max(n as u128)) })
    }

    pub fn sigma(&self) -> f64 {
        if self.n <= 1 {
            return 1.0;
        }
        (self.s as f64).ln() / (self.n as f64).ln()
    }

    pub fn leaf_cutoff(&self) -> u64 {
        leaf_cutoff(self.n, self.s)
    }

    /// Budget for a secondary structure over `nv` objects, keeping the exponent.
    pub fn secondary(&self, nv: u64) -> StorageBudget {
        StorageBudget::from_sigma(nv, self.sigma().clamp(1.0, 6.0)).expect("sigma in range")
    }
}

/// Smallest `c >= 1` with `c^5 * s >= n^6`, clamped to `[1, n]`.
pub fn leaf_cutoff(n: u64, s: u128) -> u64 {
    if n <= 1 {
        return 1;
    }
    let target = pow6(n);
    let s = BigUint::from(s.max(1));
    let ok = |c: u64| BigUint::from(c).pow(5) * &s >= target;
    let (mut lo, mut hi) = (1u64, n);
    if !ok(hi) {
        return n;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}
