//! Effective-resistance oracles and leverage scores.
//!
//! Two backends answer pair queries `(a, b) -> R~_ab`:
//!
//! - **Exact**: resistances from a factorization of the Laplacian restricted
//!   to the complement of the all-ones vector (dense up to 2000 vertices,
//!   conjugate gradients above).
//! - **Sketch(eps)**: a `p x n` matrix `Z` with `p = ceil(24 ln n / eps'^2)`
//!   rows, `eps' = eps/3`, each row a random +-1/sqrt(p) combination of the
//!   scaled incidence rows pushed through a Laplacian solve. Queries return
//!   `||Z (d_a - d_b)||^2 / (1 - eps')`, which overestimates: with high
//!   probability `R_ab <= query(a,b) <= (1+eps) R_ab`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{SpanningTree, WeightedGraph};
use crate::ledger::{Phase, QueryLedger};
use crate::solve::LaplacianSolver;
use crate::util::UnionFind;

/// Which backend a [`ResistanceOracle`] runs on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    Exact,
    Sketch { epsilon: f64 },
}

enum Backend {
    Exact(LaplacianSolver),
    Sketch {
        /// Columns indexed by vertex; one row per random projection.
        z: DMatrix<f64>,
        /// `1 / (1 - eps')`, the overestimate correction.
        correction: f64,
    },
}

/// Queryable map `(a, b) -> R~_ab`. Immutable after construction and safe to
/// share across threads; every query bumps the ledger's classical counter.
pub struct ResistanceOracle {
    mode: OracleMode,
    backend: Backend,
    ledger: Arc<QueryLedger>,
}

impl ResistanceOracle {
    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn ledger(&self) -> &Arc<QueryLedger> {
        &self.ledger
    }

    /// Approximate (or exact) effective resistance between `a` and `b`.
    pub fn query(&self, a: usize, b: usize) -> f64 {
        self.ledger.record_oracle_query();
        match &self.backend {
            Backend::Exact(solver) => solver
                .resistance(a, b)
                .expect("solver was validated at construction"),
            Backend::Sketch { z, correction } => {
                if a == b {
                    return 0.0;
                }
                let diff = z.column(a) - z.column(b);
                diff.norm_squared() * correction
            }
        }
    }
}

/// Exact oracle backed by the Laplacian pseudoinverse.
pub fn build_exact_oracle(
    graph: &WeightedGraph,
    ledger: Arc<QueryLedger>,
) -> Result<ResistanceOracle> {
    let solver = ledger.time_phase(Phase::OracleInit, || LaplacianSolver::default_for(graph))?;
    Ok(ResistanceOracle {
        mode: OracleMode::Exact,
        backend: Backend::Exact(solver),
        ledger,
    })
}

/// Sketch oracle with overestimate guarantee `R <= R~ <= (1+eps) R` (with
/// high probability, per pair). Charges `sqrt(m n) / eps` quantum-equivalent
/// queries to the ledger.
pub fn build_sketch_oracle(
    graph: &WeightedGraph,
    epsilon: f64,
    rng: &mut impl Rng,
    ledger: Arc<QueryLedger>,
) -> Result<ResistanceOracle> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 3.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let n = graph.n();
    let m = graph.m();
    if n < 2 {
        return Err(Error::InvalidInput("sketch needs at least 2 vertices".into()));
    }
    let start = std::time::Instant::now();
    let solver = LaplacianSolver::default_for(graph)?;

    let eps_prime = epsilon / 3.0;
    let p = ((24.0 * (n as f64).ln()) / (eps_prime * eps_prime)).ceil() as usize;
    let scale = 1.0 / (p as f64).sqrt();
    let sqrt_w: Vec<f64> = graph.edges().iter().map(|e| e.weight.sqrt()).collect();

    let mut z = DMatrix::<f64>::zeros(p, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for row in 0..p {
        rhs.fill(0.0);
        for (e, edge) in graph.edges().iter().enumerate() {
            let sign = if rng.random::<bool>() { scale } else { -scale };
            rhs[edge.u] += sign * sqrt_w[e];
            rhs[edge.v] -= sign * sqrt_w[e];
        }
        let y = solver.solve(&rhs)?;
        for col in 0..n {
            z[(row, col)] = y[col];
        }
    }

    ledger.charge(
        Phase::OracleInit,
        ((m as f64) * (n as f64)).sqrt() / epsilon,
    );
    ledger.add_time(Phase::OracleInit, start.elapsed());
    Ok(ResistanceOracle {
        mode: OracleMode::Sketch { epsilon },
        backend: Backend::Sketch {
            z,
            correction: 1.0 / (1.0 - eps_prime),
        },
        ledger,
    })
}

/// Per-edge leverage overestimates `l~_e = w_e * R~_e` and their 1-norm.
#[derive(Debug, Clone)]
pub struct LeverageVector {
    scores: Vec<f64>,
    lambda: f64,
}

impl LeverageVector {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, e: usize) -> f64 {
        self.scores[e]
    }

    /// The 1-norm of the scores; equals `n - 1` in exact mode on a
    /// connected graph.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Queries the oracle once per edge. Zero-weight edges get score 0 without
/// a query.
pub fn leverage_scores(graph: &WeightedGraph, oracle: &ResistanceOracle) -> LeverageVector {
    let mut scores = Vec::with_capacity(graph.m());
    for e in graph.edges() {
        if e.weight > 0.0 {
            scores.push(e.weight * oracle.query(e.u, e.v));
        } else {
            scores.push(0.0);
        }
    }
    let lambda = scores.iter().sum();
    LeverageVector { scores, lambda }
}

/// Spanning tree maximizing the product of edge weights: greedy over edges
/// sorted by descending weight (equivalently, maximum-sum tree over keys
/// `log w_e`), ties broken by smallest edge index. Charges `sqrt(m n)`
/// quantum-equivalent queries.
pub fn max_product_spanning_tree(
    graph: &WeightedGraph,
    ledger: &QueryLedger,
) -> Result<SpanningTree> {
    ledger.time_phase(Phase::TreeInit, || {
        let n = graph.n();
        let mut order: Vec<usize> = (0..graph.m())
            .filter(|&e| graph.edge(e).weight > 0.0)
            .collect();
        order.sort_by(|&a, &b| {
            graph
                .edge(b)
                .weight
                .partial_cmp(&graph.edge(a).weight)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut uf = UnionFind::new(n);
        let mut ids = Vec::with_capacity(n.saturating_sub(1));
        for e in order {
            let edge = graph.edge(e);
            if uf.union(edge.u, edge.v) {
                ids.push(e);
                if ids.len() + 1 == n {
                    break;
                }
            }
        }
        if ids.len() + 1 != n.max(1) {
            return Err(Error::Disconnected);
        }
        ledger.charge(
            Phase::TreeInit,
            ((graph.m() as f64) * (n as f64)).sqrt(),
        );
        Ok(SpanningTree::from_edge_ids(ids))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ledger() -> Arc<QueryLedger> {
        Arc::new(QueryLedger::new())
    }

    fn unit_triangle() -> WeightedGraph {
        WeightedGraph::parse("3 3\n0 1 1\n1 2 1\n0 2 1").unwrap()
    }

    #[test]
    fn exact_path_resistances() {
        let g = WeightedGraph::parse("3 2\n0 1 1\n1 2 1").unwrap();
        let oracle = build_exact_oracle(&g, ledger()).unwrap();
        assert_relative_eq!(oracle.query(0, 2), 2.0, max_relative = 1e-12);
        assert_relative_eq!(oracle.query(0, 1), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn exact_triangle_resistance_is_two_thirds() {
        let oracle = build_exact_oracle(&unit_triangle(), ledger()).unwrap();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            assert_relative_eq!(oracle.query(a, b), 2.0 / 3.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn bridge_resistance_is_inverse_weight() {
        let g = WeightedGraph::parse("2 1\n0 1 4").unwrap();
        let oracle = build_exact_oracle(&g, ledger()).unwrap();
        assert_relative_eq!(oracle.query(0, 1), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn exact_oracle_rejects_disconnected() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert!(build_exact_oracle(&g, ledger()).is_err());
    }

    #[test]
    fn sketch_overestimates_within_band() {
        let g = unit_triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let oracle = build_sketch_oracle(&g, 0.1, &mut rng, ledger()).unwrap();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let r = oracle.query(a, b);
            assert!(r >= 2.0 / 3.0 - 1e-12, "pair ({a},{b}) underestimated: {r}");
            assert!(r <= 0.7334, "pair ({a},{b}) overshoots: {r}");
        }
    }

    #[test]
    fn sketch_single_edge() {
        let g = WeightedGraph::parse("2 1\n0 1 1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let oracle = build_sketch_oracle(&g, 0.1, &mut rng, ledger()).unwrap();
        let r = oracle.query(0, 1);
        assert!((1.0..=1.1).contains(&r), "R~ = {r}");
    }

    #[test]
    fn sketch_epsilon_range_enforced() {
        let g = unit_triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(build_sketch_oracle(&g, 0.4, &mut rng, ledger()).is_err());
        assert!(build_sketch_oracle(&g, 0.0, &mut rng, ledger()).is_err());
    }

    #[test]
    fn leverage_scores_on_triangle() {
        let g = unit_triangle();
        let oracle = build_exact_oracle(&g, ledger()).unwrap();
        let lev = leverage_scores(&g, &oracle);
        for e in 0..3 {
            assert_relative_eq!(lev.score(e), 2.0 / 3.0, max_relative = 1e-12);
        }
        assert_relative_eq!(lev.lambda(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn leverage_scores_on_tree_are_one() {
        let g = WeightedGraph::parse("4 3\n0 1 2\n1 2 5\n1 3 0.5").unwrap();
        let oracle = build_exact_oracle(&g, ledger()).unwrap();
        let lev = leverage_scores(&g, &oracle);
        for e in 0..3 {
            assert_relative_eq!(lev.score(e), 1.0, max_relative = 1e-9);
        }
        assert_relative_eq!(lev.lambda(), 3.0, max_relative = 1e-9);
    }

    #[test]
    fn foster_equality_on_connected_graph() {
        let g = WeightedGraph::parse("4 5\n0 1 1\n1 2 2\n2 3 3\n0 3 4\n0 2 5").unwrap();
        let oracle = build_exact_oracle(&g, ledger()).unwrap();
        let lev = leverage_scores(&g, &oracle);
        assert_relative_eq!(lev.lambda(), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn max_product_tree_drops_min_cycle_edge() {
        let g = WeightedGraph::parse("3 3\n0 1 3\n1 2 2\n0 2 1").unwrap();
        let t = max_product_spanning_tree(&g, &QueryLedger::new()).unwrap();
        assert_eq!(t.edge_ids(), &[0, 1]);
        assert_eq!(g.weight_product(&t).unwrap(), 6.0);
    }

    #[test]
    fn max_product_tree_tie_break_is_lexicographic() {
        // All-equal weights on K4: greedy picks lowest indices that stay acyclic.
        let g = WeightedGraph::parse("4 6\n0 1 1\n0 2 1\n0 3 1\n1 2 1\n1 3 1\n2 3 1").unwrap();
        let t = max_product_spanning_tree(&g, &QueryLedger::new()).unwrap();
        assert_eq!(t.edge_ids(), &[0, 1, 2]);
    }

    #[test]
    fn max_product_tree_needs_positive_connectivity() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.0)]).unwrap();
        assert!(matches!(
            max_product_spanning_tree(&g, &QueryLedger::new()),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn ledger_counts_queries_and_charges() {
        let g = unit_triangle();
        let ledger = ledger();
        let oracle = build_exact_oracle(&g, ledger.clone()).unwrap();
        oracle.query(0, 1);
        oracle.query(1, 2);
        assert_eq!(ledger.oracle_queries(), 2);

        max_product_spanning_tree(&g, &ledger).unwrap();
        assert_relative_eq!(ledger.charged(Phase::TreeInit), 3.0);
    }
}
