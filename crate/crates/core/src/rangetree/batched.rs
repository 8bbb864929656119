use super::{StorageBudget, TriangleStructure};
use crate::kernel::Triangle4;
use crate::oracle::tri_tri_query;
use crate::report::{IntersectionReport, QueryMode};

/// Storage for `m` red queries against `n` blue triangles, or `None` when the
/// plain oracle is used instead.
pub fn batched_budget(m: u64, n: u64) -> Option<StorageBudget> {
    if m == 0 || n == 0 {
        return None;
    }
    let (mf, nf) = (m as f64, n as f64);
    if mf < nf.powf(1.0 / 6.0) || mf > nf.powi(6) {
        return None;
    }
    let s = (mf * nf).powf(6.0 / 7.0).round();
    let max = nf.powi(6);
    let s = s.clamp(nf, max);
    StorageBudget::new(n, s as u128).ok()
}

pub fn batched_tri_tri(red: &[Triangle4], blue: &[Triangle4], mode: QueryMode) -> IntersectionReport {
    match batched_budget(red.len() as u64, blue.len() as u64) {
        None => tri_tri_query(red, blue, mode),
        Some(b) => {
            let s = TriangleStructure::build(blue, b, 0).expect("budget matches input");
            s.query_batch(red, mode).0
        }
    }
}
