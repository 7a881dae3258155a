//! Weighted graph representation, edge-list text format, Laplacian, and
//! spanning-tree bookkeeping.
//!
//! Graphs are simple (no self-loops, no duplicate pairs) with nonnegative
//! edge weights; zero weights are allowed. Edge identity is the position in
//! the input edge list, so zero-weight edges keep stable indices. Vertices
//! are 0-indexed.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, ParseErrorKind, Result};
use crate::util::UnionFind;

/// One undirected edge with its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// An immutable simple undirected graph with nonnegative edge weights.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, weight)` triples, validating the same
    /// invariants as [`WeightedGraph::parse`].
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut seen = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        for (idx, &(u, v, w)) in edges.iter().enumerate() {
            validate_edge(n, u, v, w).map_err(|kind| Error::InvalidInput(format!(
                "edge {idx} ({u}, {v}, {w}): {kind}"
            )))?;
            let key = (u.min(v), u.max(v));
            if seen.insert(key, idx).is_some() {
                return Err(Error::InvalidInput(format!(
                    "edge {idx} ({u}, {v}): duplicate pair"
                )));
            }
            out.push(Edge { u, v, weight: w });
        }
        Ok(WeightedGraph { n, edges: out })
    }

    /// Parses the edge-list text format: a header line `n m` followed by `m`
    /// lines `u v w`. Weights accept decimal and scientific notation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (header_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            kind: ParseErrorKind::Header,
        })?;
        let mut it = header.split_whitespace();
        let n: usize = parse_token(it.next(), header_line, ParseErrorKind::Header)?;
        let m: usize = parse_token(it.next(), header_line, ParseErrorKind::Header)?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: header_line,
                kind: ParseErrorKind::Header,
            });
        }

        let mut edges = Vec::with_capacity(m);
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (line, text) in lines {
            if edges.len() == m {
                return Err(Error::Parse {
                    line,
                    kind: ParseErrorKind::EdgeCount {
                        expected: m,
                        found: m + 1,
                    },
                });
            }
            let mut it = text.split_whitespace();
            let u: usize = parse_token(it.next(), line, ParseErrorKind::MalformedLine)?;
            let v: usize = parse_token(it.next(), line, ParseErrorKind::MalformedLine)?;
            let w: f64 = parse_token(it.next(), line, ParseErrorKind::MalformedLine)?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line,
                    kind: ParseErrorKind::MalformedLine,
                });
            }
            validate_edge(n, u, v, w).map_err(|kind| Error::Parse { line, kind })?;
            if seen.insert((u.min(v), u.max(v)), line).is_some() {
                return Err(Error::Parse {
                    line,
                    kind: ParseErrorKind::DuplicateEdge,
                });
            }
            edges.push(Edge { u, v, weight: w });
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: text.lines().count(),
                kind: ParseErrorKind::EdgeCount {
                    expected: m,
                    found: edges.len(),
                },
            });
        }
        Ok(WeightedGraph { n, edges })
    }

    /// Serializes back to the edge-list format. Weights are printed at 17
    /// significant digits so parsing the output reproduces them bit-exactly.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            out.push_str(&format!("{} {} {:.16e}\n", e.u, e.v, e.weight));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// Neighbor lists as `(neighbor, edge id)` pairs; zero-weight edges are
    /// dropped when `positive_only` is set.
    pub fn adjacency(&self, positive_only: bool) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (id, e) in self.edges.iter().enumerate() {
            if positive_only && e.weight <= 0.0 {
                continue;
            }
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        adj
    }

    /// The weighted Laplacian: degrees on the diagonal, `-w_uv` off it.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::<f64>::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.u, e.u)] += e.weight;
            l[(e.v, e.v)] += e.weight;
            l[(e.u, e.v)] -= e.weight;
            l[(e.v, e.u)] -= e.weight;
        }
        l
    }

    /// Whether the graph (restricted to strictly positive weights when the
    /// flag is set) is connected. Vacuously true for n <= 1.
    pub fn is_connected(&self, positive_only: bool) -> bool {
        if self.n <= 1 {
            return true;
        }
        let adj = self.adjacency(positive_only);
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    stack.push(v);
                }
            }
        }
        visited == self.n
    }

    /// Checks that `tree` is a spanning tree of this graph.
    pub fn validate_tree(&self, tree: &SpanningTree) -> Result<()> {
        let ids = tree.edge_ids();
        let expected = self.n.saturating_sub(1);
        if ids.len() != expected {
            return Err(Error::InvalidTree(format!(
                "{} edges, expected {expected}",
                ids.len()
            )));
        }
        let mut uf = UnionFind::new(self.n);
        let mut prev = None;
        for &id in ids {
            if prev == Some(id) {
                return Err(Error::InvalidTree(format!("edge {id} repeated")));
            }
            prev = Some(id);
            if id >= self.edges.len() {
                return Err(Error::InvalidTree(format!("unknown edge {id}")));
            }
            let e = self.edges[id];
            if !uf.union(e.u, e.v) {
                return Err(Error::InvalidTree(format!("edge {id} closes a cycle")));
            }
        }
        if uf.components() != 1 {
            return Err(Error::InvalidTree("does not span all vertices".into()));
        }
        Ok(())
    }

    /// Product of the tree's edge weights. Errors if `tree` is not a
    /// spanning tree of this graph.
    pub fn weight_product(&self, tree: &SpanningTree) -> Result<f64> {
        self.validate_tree(tree)?;
        Ok(tree
            .edge_ids()
            .iter()
            .map(|&id| self.edges[id].weight)
            .product())
    }
}

fn validate_edge(n: usize, u: usize, v: usize, w: f64) -> std::result::Result<(), ParseErrorKind> {
    if u >= n || v >= n {
        return Err(ParseErrorKind::VertexOutOfRange);
    }
    if u == v {
        return Err(ParseErrorKind::SelfLoop);
    }
    if !w.is_finite() {
        return Err(ParseErrorKind::NonFiniteWeight);
    }
    if w < 0.0 {
        return Err(ParseErrorKind::NegativeWeight);
    }
    Ok(())
}

fn parse_token<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    kind: ParseErrorKind,
) -> Result<T> {
    token
        .and_then(|t| t.parse().ok())
        .ok_or(Error::Parse { line, kind })
}

/// A spanning tree stored as a sorted set of edge indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanningTree {
    ids: Vec<usize>,
}

impl SpanningTree {
    pub fn from_edge_ids(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        SpanningTree { ids }
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.binary_search(&id).is_ok()
    }
}

impl fmt::Display for SpanningTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.ids.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn unit_triangle() -> WeightedGraph {
        WeightedGraph::parse("3 3\n0 1 1\n1 2 1\n0 2 1").unwrap()
    }

    #[test]
    fn parse_triangle() {
        let g = unit_triangle();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 3);
        assert_eq!(g.edge(1).u, 1);
        assert_eq!(g.edge(1).v, 2);
    }

    #[test]
    fn parse_errors_name_lines() {
        match WeightedGraph::parse("2 1\n0 0 1") {
            Err(Error::Parse { line: 2, kind: ParseErrorKind::SelfLoop }) => {}
            other => panic!("expected self-loop at line 2, got {other:?}"),
        }
        match WeightedGraph::parse("2 1\n0 1 -2") {
            Err(Error::Parse { line: 2, kind: ParseErrorKind::NegativeWeight }) => {}
            other => panic!("expected negative weight, got {other:?}"),
        }
        match WeightedGraph::parse("2 1\n0 3 1") {
            Err(Error::Parse { line: 2, kind: ParseErrorKind::VertexOutOfRange }) => {}
            other => panic!("expected range error, got {other:?}"),
        }
        match WeightedGraph::parse("3 2\n0 1 1\n1 0 2") {
            Err(Error::Parse { line: 3, kind: ParseErrorKind::DuplicateEdge }) => {}
            other => panic!("expected duplicate, got {other:?}"),
        }
        match WeightedGraph::parse("3 2\n0 1 1\nbogus") {
            Err(Error::Parse { line: 3, kind: ParseErrorKind::MalformedLine }) => {}
            other => panic!("expected malformed line, got {other:?}"),
        }
        match WeightedGraph::parse("3 2\n0 1 1") {
            Err(Error::Parse { kind: ParseErrorKind::EdgeCount { expected: 2, found: 1 }, .. }) => {}
            other => panic!("expected edge count error, got {other:?}"),
        }
    }

    #[test]
    fn parse_accepts_scientific_notation() {
        let g = WeightedGraph::parse("2 1\n0 1 6.25e-2").unwrap();
        assert_eq!(g.edge(0).weight, 0.0625);
    }

    #[test]
    fn laplacian_matches_definition() {
        let l = unit_triangle().laplacian();
        let expected = DMatrix::from_row_slice(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.]);
        assert_eq!(l, expected);

        let g = WeightedGraph::parse("2 1\n0 1 5").unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[5., -5., -5., 5.]);
        assert_eq!(g.laplacian(), expected);
    }

    #[test]
    fn quadratic_form_on_triangle() {
        let l = unit_triangle().laplacian();
        let x = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_relative_eq!((x.transpose() * &l * &x)[(0, 0)], 2.0);
    }

    #[test]
    fn connectivity() {
        assert!(unit_triangle().is_connected(false));
        let isolated = WeightedGraph::from_edges(2, &[]).unwrap();
        assert!(!isolated.is_connected(false));
        // Zero-weight bridge: connected structurally, not on positive edges.
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.0)]).unwrap();
        assert!(g.is_connected(false));
        assert!(!g.is_connected(true));
    }

    #[test]
    fn weight_products() {
        let g = unit_triangle();
        let t = SpanningTree::from_edge_ids(vec![0, 1]);
        assert_eq!(g.weight_product(&t).unwrap(), 1.0);

        let g = WeightedGraph::parse("3 3\n0 1 3\n1 2 2\n0 2 1").unwrap();
        assert_eq!(g.weight_product(&SpanningTree::from_edge_ids(vec![0, 1])).unwrap(), 6.0);

        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(g.weight_product(&SpanningTree::from_edge_ids(vec![0, 1])).unwrap(), 0.0);

        // Cycle is rejected.
        assert!(g.weight_product(&SpanningTree::from_edge_ids(vec![0, 1, 2])).is_err());
    }

    #[test]
    fn serialize_round_trips() {
        let g = WeightedGraph::parse("3 3\n0 1 0.1\n1 2 1e-4\n0 2 7").unwrap();
        let text = g.to_edge_list();
        let h = WeightedGraph::parse(&text).unwrap();
        assert_eq!(g.m(), h.m());
        for (a, b) in g.edges().iter().zip(h.edges()) {
            assert_eq!((a.u, a.v), (b.u, b.v));
            assert_eq!(a.weight, b.weight);
        }
    }
}
