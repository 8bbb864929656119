//! Nested kd-trees over per-level parameter points.

use serde::{Deserialize, Serialize};

use super::budget::{leaf_cutoff, StorageBudget};
use super::form::{classify_box, BoxClass, ParamBox, RangeForm, MAX_DIM};
use super::interval::Interval;
use crate::kernel::{Point4, Sign};
use crate::report::{QueryMode, ReportBuilder};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryStats {
    pub nodes_visited: u64,
    pub canonical_sets_touched: u64,
    pub leaf_items_scanned: u64,
    pub exact_predicate_calls: u64,
}

impl QueryStats {
    pub fn absorb(&mut self, o: &QueryStats) {
        self.nodes_visited += o.nodes_visited;
        self.canonical_sets_touched += o.canonical_sets_touched;
        self.leaf_items_scanned += o.leaf_items_scanned;
        self.exact_predicate_calls += o.exact_predicate_calls;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BuildStats {
    pub nodes: u64,
    pub stored_items: u64,
    pub max_leaf: u64,
}

/// Parameter points of every item, one row per level.
#[derive(Clone, Debug, Default)]
pub(crate) struct Catalog {
    pub dims: Vec<usize>,
    pub points: Vec<Vec<[Interval; MAX_DIM]>>,
    pub signs: Vec<Vec<i8>>,
}

impl Catalog {
    pub fn new(dims: Vec<usize>) -> Catalog {
        let l = dims.len();
        Catalog { dims, points: vec![Vec::new(); l], signs: vec![Vec::new(); l] }
    }

    /// Appends one item; returns its id.
    pub fn push(&mut self, pts: Vec<[Interval; MAX_DIM]>, signs: Vec<i8>) -> u32 {
        for (l, (p, s)) in pts.into_iter().zip(signs).enumerate() {
            self.points[l].push(p);
            self.signs[l].push(s);
        }
        (self.points[0].len() - 1) as u32
    }

    pub fn push_placeholder(&mut self) -> u32 {
        let l = self.dims.len();
        self.push(vec![[Interval::ZERO; MAX_DIM]; l], vec![0; l])
    }

    pub fn levels(&self) -> usize {
        self.dims.len()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub bbox: ParamBox,
    pub start: u32,
    pub end: u32,
    pub children: Option<(u32, u32)>,
    pub next: Option<Box<Level>>,
}

#[derive(Clone, Debug)]
pub(crate) struct Tree {
    pub sign: i8,
    pub items: Vec<u32>,
    pub nodes: Vec<Node>,
}

/// All trees of one level, grouped by item sign.
#[derive(Clone, Debug, Default)]
pub(crate) struct Level {
    pub trees: Vec<Tree>,
}

struct Builder<'a> {
    cat: &'a Catalog,
    sigma: f64,
    seed: u64,
    stats: BuildStats,
}

impl Builder<'_> {
    fn level(&mut self, level: usize, items: Vec<u32>, cutoff: u64) -> Level {
        let mut out = Level::default();
        for sign in [1i8, -1] {
            let part: Vec<u32> = items.iter().copied().filter(|&i| self.cat.signs[level][i as usize] == sign).collect();
            if part.is_empty() {
                continue;
            }
            let mut tree = Tree { sign, items: part, nodes: Vec::new() };
            let len = tree.items.len();
            self.node(&mut tree, level, 0, len, 0, cutoff.max(1) as usize);
            out.trees.push(tree);
        }
        out
    }

    fn node(&mut self, tree: &mut Tree, level: usize, start: usize, end: usize, depth: usize, cutoff: usize) -> u32 {
        let dim = self.cat.dims[level];
        let pts = &self.cat.points[level];
        let mut bbox = ParamBox::empty(dim);
        for &i in &tree.items[start..end] {
            bbox.include(&pts[i as usize]);
        }
        let idx = tree.nodes.len() as u32;
        tree.nodes.push(Node { bbox, start: start as u32, end: end as u32, children: None, next: None });
        self.stats.nodes += 1;
        self.stats.stored_items += (end - start) as u64;
        let len = end - start;
        if len > cutoff {
            let d = (depth + self.seed as usize) % dim;
            tree.items[start..end].sort_by(|&x, &y| {
                let (px, py) = (pts[x as usize][d], pts[y as usize][d]);
                (px.lo + px.hi).total_cmp(&(py.lo + py.hi)).then(x.cmp(&y))
            });
            let mid = start + len.div_ceil(2);
            let l = self.node(tree, level, start, mid, depth + 1, cutoff);
            let r = self.node(tree, level, mid, end, depth + 1, cutoff);
            tree.nodes[idx as usize].children = Some((l, r));
        } else {
            self.stats.max_leaf = self.stats.max_leaf.max(len as u64);
        }
        if level + 1 < self.cat.levels() {
            let sub: Vec<u32> = tree.items[start..end].to_vec();
            let nv = sub.len() as u64;
            let b = StorageBudget::from_sigma(nv, self.sigma).expect("sigma in range");
            let next = self.level(level + 1, sub, leaf_cutoff(nv, b.s));
            tree.nodes[idx as usize].next = Some(Box::new(next));
        }
        idx
    }
}

pub(crate) fn build(cat: &Catalog, items: Vec<u32>, budget: &StorageBudget, seed: u64) -> (Level, BuildStats) {
    let mut b = Builder { cat, sigma: budget.sigma().clamp(1.0, 6.0), seed, stats: BuildStats::default() };
    let cutoff = leaf_cutoff(items.len() as u64, budget.s);
    let root = b.level(0, items, cutoff);
    (root, b.stats)
}

/// Per-query side of the search: range forms, branch multipliers and exact checks.
pub(crate) trait Probe {
    fn form(&self, level: usize) -> &RangeForm;
    /// Sign multiplier at `level` in `branch`, including any query-side sign.
    fn mult(&self, branch: usize, level: usize) -> i8;
    fn branches(&self) -> usize;
    /// Exact sign of the range polynomial at the item's parameter point.
    fn exact(&self, level: usize, item: u32) -> Sign;
    fn witness(&self, item: u32) -> Option<Point4>;
}

pub(crate) struct Search<'a, P: Probe> {
    pub cat: &'a Catalog,
    pub probe: &'a P,
    pub out: &'a mut ReportBuilder,
    pub stats: &'a mut QueryStats,
    pub index: usize,
    pub trace: Option<Vec<TraceEvent>>,
    branch: usize,
}

/// Items handed to `level` in `branch`, either as a whole canonical set or one
/// at a time after an exact leaf check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub branch: usize,
    pub level: usize,
    pub canonical: bool,
    pub items: Vec<usize>,
}

impl<'a, P: Probe> Search<'a, P> {
    pub fn new(cat: &'a Catalog, probe: &'a P, out: &'a mut ReportBuilder, stats: &'a mut QueryStats, index: usize) -> Self {
        Search { cat, probe, out, stats, index, trace: None, branch: 0 }
    }

    /// Runs all branches of the halfspace search, then scans `fallback`.
    pub fn run(&mut self, root: &Level, fallback: &[u32]) {
        for b in 0..self.probe.branches() {
            self.branch = b;
            self.level(0, root);
        }
        for &item in fallback {
            if self.out.done() {
                return;
            }
            self.stats.leaf_items_scanned += 1;
            self.direct(item);
        }
    }

    fn level(&mut self, level: usize, lv: &Level) {
        for tree in &lv.trees {
            let m = self.probe.mult(self.branch, level) * tree.sign;
            self.visit(tree, 0, level, m);
        }
    }

    fn visit(&mut self, tree: &Tree, node: u32, level: usize, m: i8) {
        if self.out.done() {
            return;
        }
        self.stats.nodes_visited += 1;
        let n = &tree.nodes[node as usize];
        match classify_box(&n.bbox, self.probe.form(level), m) {
            BoxClass::Outside => {}
            BoxClass::Inside => {
                self.stats.canonical_sets_touched += 1;
                if let Some(t) = &mut self.trace {
                    let items = tree.items[n.start as usize..n.end as usize].iter().map(|&i| i as usize).collect();
                    t.push(TraceEvent { branch: self.branch, level, canonical: true, items });
                }
                match &n.next {
                    Some(next) => self.level(level + 1, next),
                    None => self.accept_all(&tree.items[n.start as usize..n.end as usize]),
                }
            }
            BoxClass::Crossing => match n.children {
                Some((l, r)) => {
                    self.visit(tree, l, level, m);
                    self.visit(tree, r, level, m);
                }
                None => {
                    for &item in &tree.items[n.start as usize..n.end as usize] {
                        if self.out.done() {
                            return;
                        }
                        self.stats.leaf_items_scanned += 1;
                        self.scan(item, level);
                    }
                }
            },
        }
    }

    fn accept_all(&mut self, items: &[u32]) {
        if self.out.mode() == QueryMode::Report {
            for &item in items {
                self.direct(item);
            }
        } else {
            self.out.add_count(items.len() as u64);
        }
    }

    fn scan(&mut self, item: u32, from: usize) {
        for level in from..self.cat.levels() {
            self.stats.exact_predicate_calls += 1;
            let s = self.probe.exact(level, item).to_i8()
                * self.probe.mult(self.branch, level)
                * self.cat.signs[level][item as usize];
            match s {
                1 => {
                    if let Some(t) = &mut self.trace {
                        t.push(TraceEvent { branch: self.branch, level, canonical: false, items: vec![item as usize] });
                    }
                }
                -1 => return,
                _ => {
                    if level == 0 && self.branch != 0 {
                        return;
                    }
                    self.direct(item);
                    return;
                }
            }
        }
        if self.out.mode() == QueryMode::Report {
            self.direct(item);
        } else {
            self.out.add_count(1);
        }
    }

    fn direct(&mut self, item: u32) {
        self.stats.exact_predicate_calls += 1;
        if let Some(w) = self.probe.witness(item) {
            self.out.add(self.index, item as usize, || w);
        }
    }
}

/// Items whose single-level parameter point lies on the zero set of the form.
pub(crate) fn search_zero<P: Probe>(s: &mut Search<'_, P>, root: &Level, fallback: &[u32]) {
    for tree in &root.trees {
        zero_visit(s, tree, 0);
    }
    for &item in fallback {
        if s.out.done() {
            return;
        }
        s.stats.leaf_items_scanned += 1;
        s.direct(item);
    }
}

fn zero_visit<P: Probe>(s: &mut Search<'_, P>, tree: &Tree, node: u32) {
    if s.out.done() {
        return;
    }
    s.stats.nodes_visited += 1;
    let n = &tree.nodes[node as usize];
    if !s.probe.form(0).eval_box(&n.bbox).contains_zero() {
        return;
    }
    match n.children {
        Some((l, r)) => {
            zero_visit(s, tree, l);
            zero_visit(s, tree, r);
        }
        None => {
            for &item in &tree.items[n.start as usize..n.end as usize] {
                if s.out.done() {
                    return;
                }
                s.stats.leaf_items_scanned += 1;
                s.stats.exact_predicate_calls += 1;
                if s.probe.exact(0, item).is_zero() {
                    s.direct(item);
                }
            }
        }
    }
}
