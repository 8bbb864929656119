use serde::{Deserialize, Serialize};

use crate::kernel::Point4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum QueryMode {
    Detect,
    Count,
    Report,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hit {
    #[serde(rename = "indexA")]
    pub a: usize,
    #[serde(rename = "indexB")]
    pub b: usize,
    pub witness: Point4,
}

/// Result of a detection, counting or reporting query.
///
/// In `Detect` mode `count` is 0 or 1 and `pairs` stays empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub mode: QueryMode,
    pub detected: bool,
    pub count: u64,
    pub pairs: Vec<Hit>,
}

impl IntersectionReport {
    pub fn empty(mode: QueryMode) -> IntersectionReport {
        IntersectionReport { mode, detected: false, count: 0, pairs: Vec::new() }
    }
}

/// Accumulates hits for one query mode.
#[derive(Debug)]
pub struct ReportBuilder {
    report: IntersectionReport,
}

impl ReportBuilder {
    pub fn new(mode: QueryMode) -> ReportBuilder {
        ReportBuilder { report: IntersectionReport::empty(mode) }
    }

    pub fn mode(&self) -> QueryMode {
        self.report.mode
    }

    /// True once a `Detect` query has its answer.
    pub fn done(&self) -> bool {
        self.report.mode == QueryMode::Detect && self.report.detected
    }

    pub fn add(&mut self, a: usize, b: usize, witness: impl FnOnce() -> Point4) {
        self.report.detected = true;
        match self.report.mode {
            QueryMode::Detect => self.report.count = 1,
            QueryMode::Count => self.report.count += 1,
            QueryMode::Report => {
                self.report.count += 1;
                self.report.pairs.push(Hit { a, b, witness: witness() });
            }
        }
    }

    /// Adds `k` hits whose witnesses are not needed (never used in `Report` mode).
    pub fn add_count(&mut self, k: u64) {
        debug_assert_ne!(self.report.mode, QueryMode::Report);
        if k == 0 {
            return;
        }
        self.report.detected = true;
        self.report.count = match self.report.mode {
            QueryMode::Detect => 1,
            _ => self.report.count + k,
        };
    }

    pub fn merge(&mut self, other: IntersectionReport) {
        if !other.detected {
            return;
        }
        self.report.detected = true;
        match self.report.mode {
            QueryMode::Detect => self.report.count = 1,
            _ => self.report.count += other.count,
        }
        self.report.pairs.extend(other.pairs);
    }

    pub fn finish(mut self) -> IntersectionReport {
        self.report.pairs.sort_by_key(|x| (x.a, x.b));
        self.report
    }
}
