//! Statistical and exact verification: total variation, KL divergence,
//! chi-square uniformity, marginal-vs-leverage checks, and mixing curves.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::child_seed;
use crate::error::{Error, Result};
use crate::exact::{count_weighted_trees, enumerate_trees};
use crate::graph::{SpanningTree, WeightedGraph};
use crate::ledger::QueryLedger;
use crate::parallel::map_indexed;
use crate::resistance::{leverage_scores, ResistanceOracle};
use crate::walk::Walker;

/// Sample counts keyed by canonical tree encoding (sorted edge indices).
#[derive(Debug, Clone, Default)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<SpanningTree, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_trees<I: IntoIterator<Item = SpanningTree>>(trees: I) -> Self {
        let mut dist = Self::new();
        for t in trees {
            dist.record(t);
        }
        dist
    }

    pub fn record(&mut self, tree: SpanningTree) {
        *self.counts.entry(tree).or_default() += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<SpanningTree, u64> {
        &self.counts
    }

    pub fn probabilities(&self) -> BTreeMap<SpanningTree, f64> {
        self.counts
            .iter()
            .map(|(t, &c)| (t.clone(), c as f64 / self.total as f64))
            .collect()
    }

    /// Empirical probability that edge `id` appears in a sampled tree.
    pub fn edge_frequency(&self, id: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let hits: u64 = self
            .counts
            .iter()
            .filter(|(t, _)| t.contains(id))
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.total as f64
    }
}

fn check_normalized<K: Ord>(dist: &BTreeMap<K, f64>) -> Result<()> {
    let total: f64 = dist.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { total });
    }
    Ok(())
}

/// Total variation distance, half the L1 gap over the union of supports.
pub fn tv_distance<K: Ord + Clone>(
    mu: &BTreeMap<K, f64>,
    nu: &BTreeMap<K, f64>,
) -> Result<f64> {
    check_normalized(mu)?;
    check_normalized(nu)?;
    let mut acc = 0.0;
    for (k, p) in mu {
        let q = nu.get(k).copied().unwrap_or(0.0);
        acc += (p - q).abs();
    }
    for (k, q) in nu {
        if !mu.contains_key(k) {
            acc += q;
        }
    }
    Ok(acc / 2.0)
}

/// KL divergence with natural logarithm; `0 ln 0 = 0`. The first
/// distribution's support must lie inside the second's.
pub fn kl_divergence<K: Ord + Clone>(
    mu: &BTreeMap<K, f64>,
    nu: &BTreeMap<K, f64>,
) -> Result<f64> {
    check_normalized(mu)?;
    check_normalized(nu)?;
    let mut acc = 0.0;
    for (k, &p) in mu {
        if p == 0.0 {
            continue;
        }
        let q = nu.get(k).copied().unwrap_or(0.0);
        if q <= 0.0 {
            return Err(Error::SupportViolation);
        }
        acc += p * (p / q).ln();
    }
    Ok(acc.max(0.0))
}

/// Chi-square statistic and p-value against the uniform law over
/// `counts.len()` cells. A single cell is vacuously uniform (p = 1).
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let cells = counts.len();
    let total: u64 = counts.iter().sum();
    if cells <= 1 || total == 0 {
        return (0.0, 1.0);
    }
    let expected = total as f64 / cells as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((cells - 1) as f64).expect("df >= 1");
    (stat, 1.0 - dist.cdf(stat))
}

/// Per-edge comparison of empirical tree-membership frequencies against
/// leverage scores from the given oracle.
#[derive(Debug, Clone)]
pub struct MarginalRow {
    pub edge: usize,
    pub empirical: f64,
    pub expected: f64,
    /// Binomial standard error at the expected frequency.
    pub sigma: f64,
    pub z: f64,
}

#[derive(Debug, Clone)]
pub struct MarginalReport {
    pub rows: Vec<MarginalRow>,
    pub samples: u64,
    /// Edges whose empirical frequency sits more than 3 sigma away.
    pub flagged: usize,
    pub fraction_within: f64,
    /// Sum of empirical frequencies; close to n-1 on connected graphs.
    pub frequency_sum: f64,
}

pub fn marginal_check(
    samples: &EmpiricalDistribution,
    graph: &WeightedGraph,
    oracle: &ResistanceOracle,
) -> MarginalReport {
    let leverage = leverage_scores(graph, oracle);
    let n = samples.total();
    let mut rows = Vec::with_capacity(graph.m());
    let mut flagged = 0;
    let mut frequency_sum = 0.0;
    for e in 0..graph.m() {
        let expected = leverage.score(e);
        let empirical = samples.edge_frequency(e);
        frequency_sum += empirical;
        let sigma = (expected * (1.0 - expected).max(0.0) / n as f64).sqrt();
        let z = if sigma > 0.0 {
            (empirical - expected) / sigma
        } else if (empirical - expected).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() > 3.0 {
            flagged += 1;
        }
        rows.push(MarginalRow { edge: e, empirical, expected, sigma, z });
    }
    let fraction_within = 1.0 - flagged as f64 / graph.m() as f64;
    MarginalReport { rows, samples: n, flagged, fraction_within, frequency_sum }
}

/// One grid point of a mixing curve.
#[derive(Debug, Clone)]
pub struct MixingPoint {
    pub iterations: usize,
    /// TV distance to the enumerated distribution, when enumerable.
    pub tv: Option<f64>,
    /// Sum over edges of |empirical frequency - leverage score|.
    pub marginal_l1: f64,
}

/// Analytic mean and standard deviation of the marginal-L1 statistic for an
/// exact sampler at the given sample count (half-normal per edge).
pub fn marginal_l1_noise_floor(leverages: &[f64], samples: u64) -> (f64, f64) {
    let n = samples as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    for &l in leverages {
        let v = l * (1.0 - l).max(0.0) / n;
        mean += (2.0 * v / std::f64::consts::PI).sqrt();
        var += v * (1.0 - 2.0 / std::f64::consts::PI);
    }
    (mean, var.sqrt())
}

/// Draws `samples_per_point` walk samples at every depth on the grid and
/// reports the distance to stationarity: full TV against enumeration when
/// the instance is enumerable, and the marginal-L1 error always.
pub fn mixing_curve(
    walker: &Walker,
    grid: &[usize],
    samples_per_point: usize,
    seed: u64,
    jobs: usize,
) -> Result<Vec<MixingPoint>> {
    let graph = walker.graph();
    let exact_oracle =
        crate::resistance::build_exact_oracle(graph, Arc::new(QueryLedger::new()))?;
    let leverage = leverage_scores(graph, &exact_oracle);
    let reference: Option<BTreeMap<SpanningTree, f64>> = match enumerate_trees(graph) {
        Ok(trees) => Some(trees.into_iter().collect()),
        Err(Error::GuardExceeded { .. }) => None,
        Err(e) => return Err(e),
    };

    let mut points = Vec::with_capacity(grid.len());
    for (gi, &depth) in grid.iter().enumerate() {
        let point_seed = child_seed(seed, gi as u64);
        let trees = map_indexed(samples_per_point, jobs, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(point_seed, i as u64));
            walker
                .sample_with_depth(depth, &mut rng)
                .expect("walk step cannot fail on a validated walker")
        });
        let dist = EmpiricalDistribution::from_trees(trees);
        let tv = match &reference {
            Some(exact) => Some(tv_distance(&dist.probabilities(), exact)?),
            None => None,
        };
        let marginal_l1: f64 = (0..graph.m())
            .map(|e| (dist.edge_frequency(e) - leverage.score(e)).abs())
            .sum();
        points.push(MixingPoint { iterations: depth, tv, marginal_l1 });
    }
    Ok(points)
}

/// TV between a point mass on the maximum weight-product tree and the
/// enumerated distribution; what a zero-iteration walk achieves.
pub fn point_mass_tv(graph: &WeightedGraph, tree: &SpanningTree) -> Result<f64> {
    let exact: BTreeMap<SpanningTree, f64> = enumerate_trees(graph)?.into_iter().collect();
    let mut point = BTreeMap::new();
    point.insert(tree.clone(), 1.0);
    tv_distance(&point, &exact)
}

/// Convenience used by several verification suites: whether the structural
/// tree count admits enumeration.
pub fn is_enumerable(graph: &WeightedGraph) -> bool {
    count_weighted_trees(graph).is_finite() && enumerate_trees(graph).is_ok()
}
