//! The copy-expanded view of a graph: edge `e` is split into
//! `q_e = ceil(m * l~_e / lambda)` parallel copies of weight `w_e / q_e`
//! (zero-leverage edges get no copies). Flattening the copy marginals below
//! `lambda / m` is what lets the walk sample copies uniformly.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::MultigraphView;
use crate::graph::{SpanningTree, WeightedGraph};
use crate::ledger::QueryLedger;
use crate::multisample::CopyDomain;
use crate::resistance::{build_exact_oracle, leverage_scores, LeverageVector, ResistanceOracle};
use crate::util::ceil_with_slack;

/// One parallel copy of a base edge; `copy` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledEdge {
    pub edge: usize,
    pub copy: u32,
}

impl fmt::Display for LabeledEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.edge, self.copy)
    }
}

/// A spanning tree over labeled copies, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledTree {
    edges: Vec<LabeledEdge>,
}

impl LabeledTree {
    pub fn from_edges(mut edges: Vec<LabeledEdge>) -> Self {
        edges.sort_unstable();
        LabeledTree { edges }
    }

    /// Labels every edge of `tree` with copy index 1.
    pub fn label_with_ones(tree: &SpanningTree) -> Self {
        LabeledTree {
            edges: tree
                .edge_ids()
                .iter()
                .map(|&edge| LabeledEdge { edge, copy: 1 })
                .collect(),
        }
    }

    pub fn edges(&self) -> &[LabeledEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, le: LabeledEdge) -> bool {
        self.edges.binary_search(&le).is_ok()
    }

    /// Drops copy indices. A tree cannot hold two copies of one edge
    /// (parallel copies close a 2-cycle), so this is injective on trees.
    pub fn strip_labels(&self) -> SpanningTree {
        let ids: Vec<usize> = self.edges.iter().map(|le| le.edge).collect();
        for pair in ids.windows(2) {
            assert_ne!(pair[0], pair[1], "tree holds two copies of edge {}", pair[0]);
        }
        SpanningTree::from_edge_ids(ids)
    }
}

/// How the divisor `lambda` in the copy counts is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaRule {
    /// `lambda = ||l~||_1`; the tightest value the copy-marginal bound allows.
    LeverageSum,
    /// `lambda = n`.
    VertexCount,
    Fixed(f64),
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::LeverageSum
    }
}

/// The implicit copy-expanded multigraph: per-edge copy counts, cached once
/// at construction. Immutable afterwards; the oracle is never re-queried.
pub struct IsotropicView<'g> {
    graph: &'g WeightedGraph,
    lambda: f64,
    leverage: LeverageVector,
    counts: Vec<usize>,
    domain: CopyDomain,
}

impl<'g> IsotropicView<'g> {
    /// Computes leverage overestimates through `oracle` and fixes the copy
    /// counts `q_e = ceil(m * l~_e / lambda)`, with `q_e = 0` for
    /// zero-leverage edges.
    pub fn build(
        graph: &'g WeightedGraph,
        oracle: &ResistanceOracle,
        rule: LambdaRule,
    ) -> Result<Self> {
        let leverage = leverage_scores(graph, oracle);
        let lambda = match rule {
            LambdaRule::LeverageSum => leverage.lambda(),
            LambdaRule::VertexCount => graph.n() as f64,
            LambdaRule::Fixed(v) => v,
        };
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveLambda(lambda));
        }
        if lambda < leverage.lambda() * (1.0 - 1e-12) {
            log::warn!(
                "lambda = {lambda} is below the leverage 1-norm {}; the copy-count \
                 and marginal bounds are not guaranteed",
                leverage.lambda()
            );
        }
        let m = graph.m() as f64;
        let counts: Vec<usize> = leverage
            .scores()
            .iter()
            .map(|&score| {
                if score > 0.0 {
                    ceil_with_slack(m * score / lambda).max(1)
                } else {
                    0
                }
            })
            .collect();
        let domain = CopyDomain::new(counts.clone())?;
        Ok(IsotropicView {
            graph,
            lambda,
            leverage,
            counts,
            domain,
        })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn leverage(&self) -> &LeverageVector {
        &self.leverage
    }

    pub fn copy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn copy_count(&self, edge: usize) -> usize {
        self.counts[edge]
    }

    /// Weight of each copy of `edge`, `w_e / q_e`.
    pub fn copy_weight(&self, edge: usize) -> f64 {
        self.graph.edge(edge).weight / self.counts[edge] as f64
    }

    /// Total number of copies.
    pub fn m_prime(&self) -> u64 {
        self.domain.total()
    }

    pub fn domain(&self) -> &CopyDomain {
        &self.domain
    }

    /// Whether the hypotheses under which the fast-mixing bound is stated
    /// hold (`m >= 1000 n` and `lambda <= 2n`). The walk is stationary for
    /// the target distribution either way.
    pub fn mixing_hypothesis_holds(&self) -> bool {
        let n = self.graph.n() as f64;
        self.graph.m() as f64 >= 1000.0 * n && self.lambda <= 2.0 * n
    }

    pub fn validate_label(&self, le: LabeledEdge) -> Result<()> {
        let count = self.counts.get(le.edge).copied().unwrap_or(0);
        if le.copy == 0 || le.copy as usize > count {
            return Err(Error::InvalidLabel {
                edge: le.edge,
                copy: le.copy,
                count,
            });
        }
        Ok(())
    }

    /// Materializes every copy as an explicit multigraph. Intended for small
    /// instances (enumeration oracles and chain checks).
    pub fn materialize(&self) -> MultigraphView<'g> {
        let mut copies = Vec::with_capacity(self.m_prime() as usize);
        for (edge, &q) in self.counts.iter().enumerate() {
            let w = if q > 0 { self.copy_weight(edge) } else { 0.0 };
            for copy in 1..=q as u32 {
                copies.push((LabeledEdge { edge, copy }, w));
            }
        }
        MultigraphView::new(self.graph, copies)
    }
}

/// Report from [`marginal_bound_check`].
#[derive(Debug, Clone)]
pub struct MarginalBoundReport {
    pub copies: u64,
    pub copy_bound: u64,
    pub max_marginal: f64,
    pub marginal_bound: f64,
    pub worst_edge: Option<usize>,
}

impl MarginalBoundReport {
    /// Both bounds hold: `m' <= 2m` and every copy marginal `<= lambda/m`
    /// (up to 1e-9 relative slack for boundary cases in exact arithmetic).
    pub fn ok(&self) -> bool {
        self.copies <= self.copy_bound
            && self.max_marginal <= self.marginal_bound * (1.0 + 1e-9)
    }
}

/// Computes the exact per-copy marginal `w'_{(e,j)} * R_e` for every copy and
/// compares against `lambda / m`; also reports the copy-count bound `2m`.
/// Builds a fresh exact oracle, so the base graph must be desk-scale.
pub fn marginal_bound_check(view: &IsotropicView) -> Result<MarginalBoundReport> {
    let graph = view.graph();
    let exact = build_exact_oracle(graph, std::sync::Arc::new(QueryLedger::new()))?;
    let mut max_marginal = 0.0_f64;
    let mut worst_edge = None;
    for (e, edge) in graph.edges().iter().enumerate() {
        if view.copy_count(e) == 0 {
            continue;
        }
        let marginal = view.copy_weight(e) * exact.query(edge.u, edge.v);
        if marginal > max_marginal {
            max_marginal = marginal;
            worst_edge = Some(e);
        }
    }
    Ok(MarginalBoundReport {
        copies: view.m_prime(),
        copy_bound: 2 * graph.m() as u64,
        max_marginal,
        marginal_bound: view.lambda() / graph.m() as f64,
        worst_edge,
    })
}

/// Builds the multigraph on `tree UNION fresh` with the view's copy weights.
/// The two sets must be disjoint and every label valid in the view.
pub fn subgraph_construct<'g>(
    view: &IsotropicView<'g>,
    tree: &LabeledTree,
    fresh: &[LabeledEdge],
) -> Result<MultigraphView<'g>> {
    let mut copies = Vec::with_capacity(tree.len() + fresh.len());
    let mut seen: HashMap<LabeledEdge, ()> = HashMap::with_capacity(tree.len() + fresh.len());
    for &le in tree.edges().iter().chain(fresh) {
        view.validate_label(le)?;
        if seen.insert(le, ()).is_some() {
            return Err(Error::OverlappingSelection {
                edge: le.edge,
                copy: le.copy,
            });
        }
        copies.push((le, view.copy_weight(le.edge)));
    }
    Ok(MultigraphView::new(view.graph(), copies))
}
