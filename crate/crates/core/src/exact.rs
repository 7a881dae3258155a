//! Ground-truth machinery: Wilson's loop-erased-walk sampler (exact, used as
//! the walk's down-step and as a reference), the Aldous-Broder first-entry
//! sampler as a cross-check, exhaustive spanning-tree enumeration, and
//! cofactor-determinant tree counting.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{SpanningTree, WeightedGraph};
use crate::isotropic::{LabeledEdge, LabeledTree};
use crate::util::UnionFind;

/// Guard on exhaustive enumeration.
pub const ENUMERATION_GUARD: f64 = 1e6;

/// A multigraph over the base vertex set: labeled parallel copies of base
/// edges, each with its own weight.
pub struct MultigraphView<'g> {
    graph: &'g WeightedGraph,
    copies: Vec<(LabeledEdge, f64)>,
}

impl<'g> MultigraphView<'g> {
    pub fn new(graph: &'g WeightedGraph, mut copies: Vec<(LabeledEdge, f64)>) -> Self {
        copies.sort_unstable_by_key(|&(le, _)| le);
        debug_assert!(copies.windows(2).all(|w| w[0].0 != w[1].0), "duplicate label");
        MultigraphView { graph, copies }
    }

    /// One copy per base edge, carrying the full edge weight.
    pub fn from_graph(graph: &'g WeightedGraph) -> Self {
        let copies = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(edge, e)| (LabeledEdge { edge, copy: 1 }, e.weight))
            .collect();
        MultigraphView { graph, copies }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn copies(&self) -> &[(LabeledEdge, f64)] {
        &self.copies
    }

    pub fn endpoints(&self, copy_idx: usize) -> (usize, usize) {
        let e = self.graph.edge(self.copies[copy_idx].0.edge);
        (e.u, e.v)
    }

    /// Connectivity over positive-weight copies.
    pub fn is_connected_positive(&self) -> bool {
        let n = self.graph.n();
        if n <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(n);
        for (i, &(_, w)) in self.copies.iter().enumerate() {
            if w > 0.0 {
                let (u, v) = self.endpoints(i);
                uf.union(u, v);
            }
        }
        uf.components() == 1
    }
}

/// Per-vertex alias tables over incident positive-weight copies, laid out
/// flat (CSR) and rebuilt per call; build is O(copies), sampling O(1).
struct WalkIndex {
    offsets: Vec<usize>,
    copy_at: Vec<usize>,
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl WalkIndex {
    fn build(h: &MultigraphView) -> Self {
        let n = h.graph().n();
        let copies = h.copies();
        let mut offsets = vec![0usize; n + 1];
        for (i, &(_, w)) in copies.iter().enumerate() {
            if w > 0.0 {
                let (u, v) = h.endpoints(i);
                offsets[u + 1] += 1;
                offsets[v + 1] += 1;
            }
        }
        for u in 0..n {
            offsets[u + 1] += offsets[u];
        }
        let total = offsets[n];
        let mut copy_at = vec![0usize; total];
        let mut fill = offsets.clone();
        for (i, &(_, w)) in copies.iter().enumerate() {
            if w > 0.0 {
                let (u, v) = h.endpoints(i);
                copy_at[fill[u]] = i;
                fill[u] += 1;
                copy_at[fill[v]] = i;
                fill[v] += 1;
            }
        }
        let mut prob = vec![0.0f64; total];
        let mut alias = vec![0usize; total];
        let mut small = Vec::new();
        let mut large = Vec::new();
        for u in 0..n {
            let (lo, hi) = (offsets[u], offsets[u + 1]);
            if lo == hi {
                continue;
            }
            let sum: f64 = copy_at[lo..hi].iter().map(|&i| copies[i].1).sum();
            let scale = (hi - lo) as f64 / sum;
            small.clear();
            large.clear();
            for s in lo..hi {
                prob[s] = copies[copy_at[s]].1 * scale;
                if prob[s] < 1.0 {
                    small.push(s);
                } else {
                    large.push(s);
                }
            }
            while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
                alias[s] = l - lo;
                prob[l] = (prob[l] + prob[s]) - 1.0;
                if prob[l] < 1.0 {
                    small.push(l);
                } else {
                    large.push(l);
                }
            }
            for &s in large.iter().chain(small.iter()) {
                prob[s] = 1.0;
            }
        }
        WalkIndex { offsets, copy_at, prob, alias }
    }

    fn has_neighbors(&self, u: usize) -> bool {
        self.offsets[u + 1] > self.offsets[u]
    }

    /// Incident copy index, drawn proportionally to copy weight.
    fn sample(&self, u: usize, rng: &mut impl Rng) -> usize {
        let lo = self.offsets[u];
        let s = lo + rng.random_range(0..self.offsets[u + 1] - lo);
        if rng.random::<f64>() < self.prob[s] {
            self.copy_at[s]
        } else {
            self.copy_at[lo + self.alias[s]]
        }
    }
}

/// Samples a labeled spanning tree of the multigraph exactly from the
/// distribution proportional to the product of copy weights, by loop-erased
/// random walks rooted at vertex 0.
pub fn wilson_sample(h: &MultigraphView, rng: &mut impl Rng) -> Result<LabeledTree> {
    if !h.is_connected_positive() {
        return Err(Error::Disconnected);
    }
    let n = h.graph().n();
    if n <= 1 {
        return Ok(LabeledTree::from_edges(Vec::new()));
    }
    let (incident, tables) = incidence_tables(h);

    let mut in_tree = vec![false; n];
    let mut next_vertex = vec![usize::MAX; n];
    let mut next_copy = vec![usize::MAX; n];
    in_tree[0] = true;
    let mut tree_copies = Vec::with_capacity(n - 1);
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let table = tables[u].as_ref().expect("connected graph has no dead ends");
            let copy_idx = incident[u][table.sample(rng)];
            let (a, b) = h.endpoints(copy_idx);
            let nbr = if a == u { b } else { a };
            next_vertex[u] = nbr;
            next_copy[u] = copy_idx;
            u = nbr;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            tree_copies.push(h.copies()[next_copy[u]].0);
            u = next_vertex[u];
        }
    }
    debug_assert_eq!(tree_copies.len(), n - 1);
    Ok(LabeledTree::from_edges(tree_copies))
}

/// Wilson's sampler on a plain graph, labels stripped.
pub fn wilson_sample_graph(g: &WeightedGraph, rng: &mut impl Rng) -> Result<SpanningTree> {
    Ok(wilson_sample(&MultigraphView::from_graph(g), rng)?.strip_labels())
}

/// Exact sampler via a random walk that keeps the first incoming edge of
/// each vertex, run until every vertex has been visited.
pub fn aldous_broder_sample(g: &WeightedGraph, rng: &mut impl Rng) -> Result<SpanningTree> {
    if !g.is_connected(true) {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    if n <= 1 {
        return Ok(SpanningTree::from_edge_ids(Vec::new()));
    }
    let h = MultigraphView::from_graph(g);
    let (incident, tables) = incidence_tables(&h);

    let mut entry = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    let mut remaining = n - 1;
    let mut u = 0usize;
    visited[0] = true;
    while remaining > 0 {
        let table = tables[u].as_ref().expect("connected graph has no dead ends");
        let copy_idx = incident[u][table.sample(rng)];
        let (a, b) = h.endpoints(copy_idx);
        let v = if a == u { b } else { a };
        if !visited[v] {
            visited[v] = true;
            entry[v] = h.copies()[copy_idx].0.edge;
            remaining -= 1;
        }
        u = v;
    }
    Ok(SpanningTree::from_edge_ids(
        entry.into_iter().filter(|&e| e != usize::MAX).collect(),
    ))
}

/// Weighted spanning-tree count: the determinant of the Laplacian with row
/// and column 0 removed. Returns 0 for graphs that are disconnected on
/// positive-weight edges.
pub fn count_weighted_trees(g: &WeightedGraph) -> f64 {
    let n = g.n();
    if n <= 1 {
        return 1.0;
    }
    if !g.is_connected(true) {
        return 0.0;
    }
    cofactor_determinant(&g.laplacian())
}

fn cofactor_determinant(l: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    let minor = l.view((1, 1), (n - 1, n - 1)).into_owned();
    minor.determinant()
}

/// Structural spanning-tree count, ignoring weights (every edge counts 1).
fn structural_tree_count(g: &WeightedGraph) -> f64 {
    let n = g.n();
    if n <= 1 {
        return 1.0;
    }
    if !g.is_connected(false) {
        return 0.0;
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.u)] += 1.0;
        l[(e.v, e.v)] += 1.0;
        l[(e.u, e.v)] -= 1.0;
        l[(e.v, e.u)] -= 1.0;
    }
    cofactor_determinant(&l)
}

/// All spanning trees with probabilities proportional to their weight
/// products, in lexicographic order of sorted edge-index tuples. Guarded by
/// the structural tree count ([`ENUMERATION_GUARD`]).
pub fn enumerate_trees(g: &WeightedGraph) -> Result<Vec<(SpanningTree, f64)>> {
    let n = g.n();
    if n <= 1 {
        return Ok(vec![(SpanningTree::from_edge_ids(Vec::new()), 1.0)]);
    }
    if !g.is_connected(false) {
        return Err(Error::Disconnected);
    }
    let structural = structural_tree_count(g);
    if structural > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            what: "spanning-tree enumeration",
            limit: ENUMERATION_GUARD as u64,
            actual: structural as u64,
        });
    }

    let mut out: Vec<(SpanningTree, f64)> = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(n - 1);
    // Delete/contract backtracking over edges in index order: at each edge,
    // either contract it into the partial forest or delete it.
    fn recurse(
        g: &WeightedGraph,
        idx: usize,
        chosen: &mut Vec<usize>,
        uf: &UnionFind,
        out: &mut Vec<(SpanningTree, f64)>,
    ) {
        let n = g.n();
        let need = (n - 1) - chosen.len();
        if need == 0 {
            let product = chosen.iter().map(|&e| g.edge(e).weight).product();
            out.push((SpanningTree::from_edge_ids(chosen.clone()), product));
            return;
        }
        if g.m() - idx < need {
            return;
        }
        let e = g.edge(idx);
        // Clone-based union-find keeps the branching simple at this scale.
        let mut uf_inc = uf.clone();
        if uf_inc.union(e.u, e.v) {
            chosen.push(idx);
            recurse(g, idx + 1, chosen, &uf_inc, out);
            chosen.pop();
        }
        recurse(g, idx + 1, chosen, uf, out);
    }
    let uf = UnionFind::new(n);
    recurse(g, 0, &mut chosen, &uf, &mut out);
    debug_assert!(
        (out.len() as f64 - structural).abs() < 1e-6 * structural.max(1.0),
        "enumerated {} trees, cofactor says {structural}",
        out.len()
    );

    let total: f64 = out.iter().map(|(_, p)| p).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroTotalWeight);
    }
    for (_, p) in &mut out {
        *p /= total;
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// All labeled spanning trees of an explicit multigraph with normalized
/// probabilities, for tiny instances (at most 20 copies).
pub fn enumerate_labeled_trees(h: &MultigraphView) -> Result<Vec<(LabeledTree, f64)>> {
    let n = h.graph().n();
    let copies = h.copies();
    if copies.len() > 20 {
        return Err(Error::GuardExceeded {
            what: "labeled enumeration",
            limit: 20,
            actual: copies.len() as u64,
        });
    }
    if n <= 1 {
        return Ok(vec![(LabeledTree::from_edges(Vec::new()), 1.0)]);
    }
    let k = n - 1;
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(k);
    fn recurse(
        h: &MultigraphView,
        idx: usize,
        stack: &mut Vec<usize>,
        uf: &UnionFind,
        k: usize,
        out: &mut Vec<(LabeledTree, f64)>,
    ) {
        if stack.len() == k {
            let weight: f64 = stack.iter().map(|&i| h.copies()[i].1).product();
            let edges = stack.iter().map(|&i| h.copies()[i].0).collect();
            out.push((LabeledTree::from_edges(edges), weight));
            return;
        }
        if h.copies().len() - idx < k - stack.len() {
            return;
        }
        let (u, v) = h.endpoints(idx);
        let mut uf_inc = uf.clone();
        if uf_inc.union(u, v) {
            stack.push(idx);
            recurse(h, idx + 1, stack, &uf_inc, k, out);
            stack.pop();
        }
        recurse(h, idx + 1, stack, uf, k, out);
    }
    let uf = UnionFind::new(n);
    recurse(h, 0, &mut stack, &uf, k, &mut out);
    let total: f64 = out.iter().map(|(_, p)| p).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroTotalWeight);
    }
    for (_, p) in &mut out {
        *p /= total;
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
