//! Ordered enumeration of an encoded set's projection by interval bisection.
//!
//! Points `w` of the projection are visited in the order of `R w` compared
//! lexicographically. A search node is a pair of bound vectors `l <= R w <= u`;
//! empty nodes are discarded after one counting query, nodes with `l = u`
//! yield the unique solution of `R w = l`, and all others are split in half
//! along the first coordinate where the bounds differ. The stack holds at
//! most one pending sibling per level, so memory is logarithmic in the box
//! size and independent of the number of outputs.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::genfunc::{normalize_orientation, pick_generic_lambda, Srf};
use crate::linalg;
use crate::polyhedra::Polyhedron;
use crate::setops::count_in_polytope;

/// Nonnegative full-rank square matrix inducing the order `w1 < w2` iff
/// `R w1` is lexicographically smaller than `R w2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TermOrder {
    rows: Vec<Vec<i64>>,
}

impl TermOrder {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::InvalidInput("order matrix is empty".into()));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput("order matrix must be square".into()));
        }
        if rows.iter().flatten().any(|&x| x < 0) {
            return Err(Error::InvalidInput("order matrix entries must be nonnegative".into()));
        }
        let m: Vec<Vec<i128>> = rows.iter().map(|r| linalg::to_i128(r)).collect();
        if linalg::det(&m) == 0 {
            return Err(Error::InvalidInput("order matrix must have full rank".into()));
        }
        Ok(TermOrder { rows })
    }

    /// Plain lexicographic order.
    pub fn identity(p: usize) -> Self {
        let rows = (0..p)
            .map(|i| (0..p).map(|j| i64::from(i == j)).collect())
            .collect();
        TermOrder { rows }
    }

    /// Reads a whitespace-separated square matrix, one row per line.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<Vec<i64>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Parse(format!("invalid integer `{t}`"))))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        TermOrder::new(rows)
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    /// Largest entry (at least 1).
    pub fn max_entry(&self) -> i64 {
        self.rows.iter().flatten().copied().max().unwrap_or(1).max(1)
    }

    pub fn apply(&self, w: &[i64]) -> Vec<i128> {
        self.rows.iter().map(|r| linalg::dot(&linalg::to_i128(r), &linalg::to_i128(w))).collect()
    }

    pub fn cmp(&self, w1: &[i64], w2: &[i64]) -> Ordering {
        self.apply(w1).cmp(&self.apply(w2))
    }

    /// The unique `w` with `R w = target`, if integral.
    fn solve(&self, target: &[i64]) -> Option<Vec<i64>> {
        let m: Vec<Vec<i128>> = self.rows.iter().map(|r| linalg::to_i128(r)).collect();
        let (num, den) = linalg::solve(&m, &linalg::to_i128(target))?;
        if den != 1 {
            return None;
        }
        num.iter().map(|&x| i64::try_from(x).ok()).collect()
    }
}

impl std::fmt::Display for TermOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in &self.rows {
            let s: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", s.join(" "))?;
        }
        Ok(())
    }
}

/// Compares `R w1` and `R w2` lexicographically.
pub fn compare(order: &TermOrder, w1: &[i64], w2: &[i64]) -> Result<Ordering> {
    let p = order.p();
    for w in [w1, w2] {
        if w.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: w.len() });
        }
    }
    Ok(order.cmp(w1, w2))
}

/// `(-p M N 1, p M N 1)` with `N` the largest entry of `R`; brackets `R w`
/// for every `w` in `[-M, M]^p`.
pub fn initial_bounds(m: i64, order: &TermOrder) -> (Vec<i64>, Vec<i64>) {
    let p = order.p() as i64;
    let bound = p * m * order.max_entry();
    (vec![-bound; order.p()], vec![bound; order.p()])
}

/// `[-M, M]^{k-p} x {w in [-M, M]^p : l <= R w <= u}`.
pub fn slab_polytope(k: usize, l: &[i64], u: &[i64], m: i64, order: &TermOrder) -> Polyhedron {
    let p = order.p();
    let lead = k - p;
    let mut a = Vec::with_capacity(2 * k + 2 * p);
    let mut b = Vec::with_capacity(2 * k + 2 * p);
    for i in 0..k {
        let mut row = vec![0; k];
        row[i] = 1;
        a.push(row.clone());
        b.push(m);
        row[i] = -1;
        a.push(row);
        b.push(m);
    }
    for (j, r) in order.rows().iter().enumerate() {
        let mut row = vec![0; k];
        row[lead..].copy_from_slice(r);
        a.push(row.clone());
        b.push(u[j]);
        a.push(row.iter().map(|x| -x).collect());
        b.push(-l[j]);
    }
    Polyhedron::new(a, b, k).expect("consistent shapes")
}

/// True iff no point of the encoded set projects into `l <= R w <= u`.
pub fn is_empty_slab(gv: &Srf, l: &[i64], u: &[i64], m: i64, order: &TermOrder) -> Result<bool> {
    let q = slab_polytope(gv.dim, l, u, m, order);
    Ok(count_in_polytope(gv, &q)?.is_zero())
}

/// Work counters of one enumeration run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DelayMetrics {
    /// Inner nodes and empty leaves visited since the previous output (or
    /// the start), maximized over all outputs and the final stretch.
    pub max_nodes_between_outputs: usize,
    /// Deepest search node visited (the root has depth 0).
    pub max_depth: usize,
    /// Largest number of pending nodes on the stack.
    pub max_stack: usize,
    pub emptiness_tests: usize,
    pub outputs: usize,
    /// Inner nodes whose subtree produced no output.
    pub barren_inner_nodes: usize,
}

impl DelayMetrics {
    /// `4 p log2(2 p M N + 1) + 4`.
    pub fn node_bound(p: usize, m: i64, n: i64) -> f64 {
        let p = p as f64;
        4.0 * p * (2.0 * p * m as f64 * n as f64 + 1.0).log2() + 4.0
    }
}

struct Node {
    l: Vec<i64>,
    u: Vec<i64>,
    depth: usize,
}

/// Pull-based stream over the projection of an encoded set onto its last
/// `p` coordinates, in the order given by a [`TermOrder`].
pub struct EnumerationStream {
    gv: Arc<Srf>,
    m: i64,
    order: TermOrder,
    stack: Vec<Node>,
    since_output: usize,
    metrics: DelayMetrics,
    /// inner nodes awaiting their first output: (depth, outputs at entry)
    open_inner: Vec<(usize, usize)>,
    failed: bool,
}

impl EnumerationStream {
    pub fn new(gv: Arc<Srf>, m: i64, order: TermOrder) -> Result<Self> {
        let k = gv.dim;
        let p = order.p();
        if p > k {
            return Err(Error::DimensionMismatch { expected: k, found: p });
        }
        if m < 0 {
            return Err(Error::InvalidInput("bound must be nonnegative".into()));
        }
        // orient once so every emptiness test reuses the same terms
        let lambda = pick_generic_lambda(&gv);
        let oriented = Arc::new(normalize_orientation(&gv, &lambda)?);
        let (l, u) = initial_bounds(m, &order);
        let stack = if oriented.is_empty() {
            Vec::new()
        } else {
            vec![Node { l, u, depth: 0 }]
        };
        Ok(EnumerationStream {
            gv: oriented,
            m,
            order,
            stack,
            since_output: 0,
            metrics: DelayMetrics::default(),
            open_inner: Vec::new(),
            failed: false,
        })
    }

    pub fn metrics(&self) -> &DelayMetrics {
        &self.metrics
    }

    /// Number of pending search nodes.
    pub fn pending(&self) -> usize {
        self.stack.len()
    }

    fn record_visit(&mut self) {
        self.since_output += 1;
        self.metrics.max_nodes_between_outputs = self.metrics.max_nodes_between_outputs.max(self.since_output);
    }

    fn close_inner_nodes(&mut self, depth: usize) {
        // inner nodes at depth >= the current node's depth have finished
        while let Some(&(d, at_entry)) = self.open_inner.last() {
            if d < depth {
                break;
            }
            self.open_inner.pop();
            if self.metrics.outputs == at_entry {
                self.metrics.barren_inner_nodes += 1;
            }
        }
    }

    fn step(&mut self) -> Result<Option<Vec<i64>>> {
        while let Some(node) = self.stack.pop() {
            self.close_inner_nodes(node.depth);
            self.metrics.max_depth = self.metrics.max_depth.max(node.depth);
            self.metrics.emptiness_tests += 1;
            if is_empty_slab(&self.gv, &node.l, &node.u, self.m, &self.order)? {
                self.record_visit();
                continue;
            }
            if node.l == node.u {
                match self.order.solve(&node.l) {
                    Some(w) => {
                        self.metrics.outputs += 1;
                        self.since_output = 0;
                        return Ok(Some(w));
                    }
                    None => {
                        self.record_visit();
                        continue;
                    }
                }
            }
            self.record_visit();
            self.open_inner.push((node.depth, self.metrics.outputs));
            let j = (0..node.l.len()).find(|&j| node.l[j] != node.u[j]).expect("bounds differ");
            let mid = (node.l[j] + node.u[j]).div_euclid(2);
            let mut left_u = node.u.clone();
            left_u[j] = mid;
            let mut right_l = node.l.clone();
            right_l[j] = mid + 1;
            let depth = node.depth + 1;
            self.stack.push(Node { l: right_l, u: node.u, depth });
            self.stack.push(Node { l: node.l, u: left_u, depth });
            self.metrics.max_stack = self.metrics.max_stack.max(self.stack.len());
        }
        self.close_inner_nodes(0);
        Ok(None)
    }
}

impl Iterator for EnumerationStream {
    type Item = Result<Vec<i64>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.step() {
            Ok(Some(w)) => Some(Ok(w)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Stream over `{w : (t, w) in V}` for the last `p = order.p()` coordinates.
/// `gv` must encode a subset of `[-m, m]^k`.
pub fn enumerate_projection(gv: &Srf, m: i64, order: &TermOrder) -> Result<EnumerationStream> {
    EnumerationStream::new(Arc::new(gv.clone()), m, order.clone())
}

/// Moves the coordinates listed in `trailing` to the end (in that order),
/// keeping the remaining ones in their original order in front.
pub fn move_to_end(g: &Srf, trailing: &[usize]) -> Result<Srf> {
    if trailing.iter().any(|&i| i >= g.dim) {
        return Err(Error::InvalidInput("coordinate index out of range".into()));
    }
    let mut perm: Vec<usize> = (0..g.dim).filter(|i| !trailing.contains(i)).collect();
    perm.extend_from_slice(trailing);
    g.permute(&perm)
}
