//! Graph generators for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::graph::WeightedGraph;

/// Path on `n` vertices with unit weights.
pub fn path(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges).unwrap()
}

/// Complete graph with constant weight.
pub fn complete(n: usize, weight: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v, weight));
        }
    }
    WeightedGraph::from_edges(n, &edges).unwrap()
}

/// Connected graph with exactly `m` edges: a uniform random labeled tree
/// plus extra distinct pairs, weights uniform in `[w_lo, w_hi]`. Edge order
/// is shuffled so tree edges are not distinguishable by index.
pub fn random_connected(
    n: usize,
    m: usize,
    w_lo: f64,
    w_hi: f64,
    rng: &mut impl Rng,
) -> Result<WeightedGraph> {
    assert!(n >= 2, "need at least 2 vertices");
    let max_m = n * (n - 1) / 2;
    assert!((n - 1..=max_m).contains(&m), "m = {m} outside [{}, {max_m}]", n - 1);

    let mut pairs: Vec<(usize, usize)> = random_tree_edges(n, rng);
    let mut used: std::collections::HashSet<(usize, usize)> = pairs.iter().copied().collect();
    while pairs.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if used.insert(key) {
            pairs.push(key);
        }
    }
    pairs.shuffle(rng);
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(u, v)| (u, v, rng.random_range(w_lo..w_hi)))
        .collect();
    WeightedGraph::from_edges(n, &edges)
}

/// Uniform random labeled tree via a random sequence decode.
fn random_tree_edges(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| degree[v] == 1)
        .map(std::cmp::Reverse)
        .collect();
    for &s in &seq {
        let std::cmp::Reverse(leaf) = heap.pop().expect("sequence decode always has a leaf");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            heap.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = heap.pop().unwrap();
    let std::cmp::Reverse(b) = heap.pop().unwrap();
    edges.push((a.min(b), a.max(b)));
    edges
}

/// The dense benchmark family: `m = n(n-1)/4` edges, weights in `[0.1, 10)`.
pub fn dense(n: usize, rng: &mut impl Rng) -> WeightedGraph {
    let m = (n * (n - 1) / 4).max(n - 1);
    random_connected(n, m, 0.1, 10.0, rng).unwrap()
}

/// The sparse benchmark family: `m = 4n` edges (capped), weights in `[0.1, 10)`.
pub fn sparse(n: usize, rng: &mut impl Rng) -> WeightedGraph {
    let m = (4 * n).min(n * (n - 1) / 2).max(n - 1);
    random_connected(n, m, 0.1, 10.0, rng).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_graphs_are_connected_with_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.random_range(2..=12);
            let max_m = n * (n - 1) / 2;
            let m = rng.random_range(n - 1..=max_m);
            let g = random_connected(n, m, 0.1, 10.0, &mut rng).unwrap();
            assert_eq!(g.n(), n);
            assert_eq!(g.m(), m);
            assert!(g.is_connected(true));
            for e in g.edges() {
                assert!(e.weight >= 0.1 && e.weight < 10.0);
            }
        }
    }

    #[test]
    fn fixed_families() {
        assert_eq!(path(5).m(), 4);
        assert_eq!(complete(5, 1.0).m(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(dense(10, &mut rng).is_connected(true));
        assert!(sparse(10, &mut rng).is_connected(true));
    }
}
