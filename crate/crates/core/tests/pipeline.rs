//! Cross-module checks: the copy expansion preserves resistances and the
//! target distribution, enumeration agrees with the algebraic oracles, and
//! the walk is invariant under weight scaling.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spantree::exact::{
    count_weighted_trees, enumerate_labeled_trees, enumerate_trees, wilson_sample_graph,
};
use spantree::family;
use spantree::graph::WeightedGraph;
use spantree::isotropic::{IsotropicView, LambdaRule};
use spantree::ledger::QueryLedger;
use spantree::resistance::{build_exact_oracle, leverage_scores, max_product_spanning_tree};
use spantree::verify::{tv_distance, EmpiricalDistribution};
use spantree::walk::{WalkConfig, Walker};
use spantree::{child_seed, OracleMode, SpanningTree};

fn exact_walk_config() -> WalkConfig {
    WalkConfig {
        oracle: OracleMode::Exact,
        ..WalkConfig::default()
    }
}

#[test]
fn count_matches_enumeration_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let g = family::random_connected(n, m, 0.1, 10.0, &mut rng).unwrap();
        let count = count_weighted_trees(&g);
        let trees = enumerate_trees(&g).unwrap();
        let total_prob: f64 = trees.iter().map(|(_, p)| p).sum();
        assert!((total_prob - 1.0).abs() < 1e-12);
        // Re-derive the unnormalized total from weight products.
        let total_weight: f64 = trees
            .iter()
            .map(|(t, _)| g.weight_product(t).unwrap())
            .sum();
        assert!(
            (count - total_weight).abs() <= 1e-9 * total_weight.abs(),
            "cofactor {count} vs enumeration {total_weight}"
        );
    }
}

#[test]
fn enumeration_marginals_equal_leverage_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..10 {
        let n = rng.random_range(3..=6);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let g = family::random_connected(n, m, 0.1, 10.0, &mut rng).unwrap();
        let oracle = build_exact_oracle(&g, Arc::new(QueryLedger::new())).unwrap();
        let lev = leverage_scores(&g, &oracle);
        let trees = enumerate_trees(&g).unwrap();
        for e in 0..g.m() {
            let marginal: f64 = trees
                .iter()
                .filter(|(t, _)| t.contains(e))
                .map(|(_, p)| p)
                .sum();
            assert!(
                (marginal - lev.score(e)).abs() < 1e-9,
                "edge {e}: marginal {marginal} vs leverage {}",
                lev.score(e)
            );
        }
    }
}

#[test]
fn resistance_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..10 {
        let n = rng.random_range(4..=10);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let g = family::random_connected(n, m, 0.1, 10.0, &mut rng).unwrap();
        let oracle = build_exact_oracle(&g, Arc::new(QueryLedger::new())).unwrap();
        for _ in 0..30 {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let c = rng.random_range(0..n);
            let (rab, rbc, rac) = (oracle.query(a, b), oracle.query(b, c), oracle.query(a, c));
            assert!(rac <= rab + rbc + 1e-9, "({a},{b},{c}): {rac} > {rab} + {rbc}");
        }
    }
}

#[test]
fn max_product_tree_beats_random_trees_and_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..10 {
        let n = rng.random_range(3..=6);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let g = family::random_connected(n, m, 0.1, 10.0, &mut rng).unwrap();
        let best = max_product_spanning_tree(&g, &QueryLedger::new()).unwrap();
        let best_product = g.weight_product(&best).unwrap();

        for _ in 0..1000 {
            let t = wilson_sample_graph(&g, &mut rng).unwrap();
            assert!(g.weight_product(&t).unwrap() <= best_product * (1.0 + 1e-12));
        }
        let argmax = enumerate_trees(&g)
            .unwrap()
            .into_iter()
            .map(|(t, _)| g.weight_product(&t).unwrap())
            .fold(0.0_f64, f64::max);
        assert!((best_product - argmax).abs() <= 1e-9 * argmax);
    }
}

#[test]
fn copy_expansion_preserves_resistances() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..5 {
        let n = rng.random_range(3..=5);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let g = family::random_connected(n, m, 0.5, 4.0, &mut rng).unwrap();
        let oracle = build_exact_oracle(&g, Arc::new(QueryLedger::new())).unwrap();
        let view = IsotropicView::build(&g, &oracle, LambdaRule::Fixed(1.0)).unwrap();

        // Materialize the expanded multigraph as a plain graph by summing
        // parallel copies back into one edge per pair; resistances must
        // agree with the base graph.
        let mut weight_by_pair: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(le, w) in view.materialize().copies() {
            let e = g.edge(le.edge);
            *weight_by_pair.entry((e.u.min(e.v), e.u.max(e.v))).or_default() += w;
        }
        let collapsed: Vec<(usize, usize, f64)> =
            weight_by_pair.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        let g2 = WeightedGraph::from_edges(n, &collapsed).unwrap();
        let oracle2 = build_exact_oracle(&g2, Arc::new(QueryLedger::new())).unwrap();
        for a in 0..n {
            for b in (a + 1)..n {
                assert!(
                    (oracle.query(a, b) - oracle2.query(a, b)).abs() < 1e-9,
                    "resistance changed between ({a},{b})"
                );
            }
        }
    }
}

#[test]
fn labeled_pushforward_matches_base_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for _ in 0..5 {
        let n = rng.random_range(3..=4);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let g = family::random_connected(n, m, 0.5, 4.0, &mut rng).unwrap();
        let oracle = build_exact_oracle(&g, Arc::new(QueryLedger::new())).unwrap();
        let view = IsotropicView::build(&g, &oracle, LambdaRule::Fixed(1.5)).unwrap();
        if view.m_prime() > 14 {
            continue;
        }
        let labeled = enumerate_labeled_trees(&view.materialize()).unwrap();
        let mut push: BTreeMap<SpanningTree, f64> = BTreeMap::new();
        for (t, p) in labeled {
            *push.entry(t.strip_labels()).or_default() += p;
        }
        let exact: BTreeMap<_, _> = enumerate_trees(&g).unwrap().into_iter().collect();
        let tv = tv_distance(&push, &exact).unwrap();
        assert!(tv < 1e-12, "push-forward TV = {tv}");
    }
}

#[test]
fn walk_is_invariant_under_weight_scaling() {
    let g1 = WeightedGraph::from_edges(
        4,
        &[(0, 1, 0.7), (1, 2, 2.0), (2, 3, 1.2), (0, 3, 3.0), (0, 2, 0.4)],
    )
    .unwrap();
    let scaled: Vec<(usize, usize, f64)> = g1
        .edges()
        .iter()
        .map(|e| (e.u, e.v, e.weight * 1000.0))
        .collect();
    let g2 = WeightedGraph::from_edges(4, &scaled).unwrap();

    let samples = 30_000;
    let mut dists = Vec::new();
    for (seed, g) in [(10u64, &g1), (10u64, &g2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let walker = Walker::new(g, &exact_walk_config(), &mut rng).unwrap();
        let trees = spantree::parallel::map_indexed(samples, 2, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, i as u64));
            walker.sample(&mut rng).unwrap()
        });
        dists.push(EmpiricalDistribution::from_trees(trees).probabilities());
    }
    let tv = tv_distance(&dists[0], &dists[1]).unwrap();
    assert!(tv < 0.02, "scaling changed the output law: TV = {tv}");
}

#[test]
fn walk_long_run_stays_on_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let g = family::random_connected(8, 16, 0.1, 10.0, &mut rng).unwrap();
    let walker = Walker::new(&g, &exact_walk_config(), &mut rng).unwrap();
    let mut state = spantree::walk::WalkState {
        tree: walker.start_tree().clone(),
        iteration: 0,
    };
    for _ in 0..10_000 {
        state = walker.step(&state, &mut rng).unwrap();
    }
    g.validate_tree(&state.tree.strip_labels()).unwrap();
    assert_eq!(state.iteration, 10_000);
}
