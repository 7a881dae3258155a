//! The large-step down-up walk over spanning trees.
//!
//! One sample: build a resistance oracle, take the maximum weight-product
//! tree labeled with copy index 1 as the start, then repeat M times: draw
//! `k` fresh copies uniformly outside the current tree (up-step), build the
//! subgraph on the union, and resample a tree exactly from the subgraph's
//! weighted distribution (down-step). The final tree is returned unlabeled.
//!
//! The down-step sampler is exact, so the per-iteration error budget
//! `epsilon / (2M)` is consumed with zero error; the budget plumbing stays in
//! the configuration for any future approximate backend.

use nalgebra::{DMatrix, RowDVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{enumerate_labeled_trees, wilson_sample};
use crate::graph::{SpanningTree, WeightedGraph};
use crate::isotropic::{subgraph_construct, IsotropicView, LabeledTree, LambdaRule};
use crate::ledger::{Phase, QueryLedger};
use crate::multisample::iso_sample;
use crate::resistance::{
    build_exact_oracle, build_sketch_oracle, max_product_spanning_tree, OracleMode,
};
use crate::subsets::{binomial, complement, is_subset, k_subsets};

/// Knobs for one walk; see field docs for defaults.
#[derive(Debug, Clone)]
pub struct WalkConfig {
    /// Target total-variation accuracy, in (0, 1). Default 0.05.
    pub epsilon: f64,
    /// Fresh copies drawn per iteration; `None` means `2n`. The effective
    /// count is clamped to the number of copies outside the tree.
    pub k_fresh: Option<usize>,
    /// Iteration count; `None` means
    /// `ceil(C * ln^3(n+2) * ln(2/epsilon))`.
    pub iterations: Option<usize>,
    /// The constant `C` in the default iteration count. Default 2.
    pub mixing_constant: f64,
    /// How the copy-count divisor lambda is chosen. Default the leverage
    /// 1-norm, the tightest value the marginal bound allows.
    pub lambda_mode: LambdaRule,
    /// Resistance oracle backend. Default `Sketch { epsilon: 0.1 }`.
    pub oracle: OracleMode,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            epsilon: 0.05,
            k_fresh: None,
            iterations: None,
            mixing_constant: 2.0,
            lambda_mode: LambdaRule::LeverageSum,
            oracle: OracleMode::Sketch { epsilon: 0.1 },
        }
    }
}

/// `ceil(c * ln^3(n+2) * ln(2/epsilon))`, at least 1.
pub fn default_iterations(n: usize, epsilon: f64, c: f64) -> usize {
    let ln_n = ((n + 2) as f64).ln();
    (c * ln_n.powi(3) * (2.0 / epsilon).ln()).ceil().max(1.0) as usize
}

/// Position of the walk after some number of steps.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub tree: LabeledTree,
    pub iteration: usize,
}

/// A prepared walk: oracle built, copy counts fixed, start tree labeled.
/// Immutable, so independent samples may run concurrently with their own
/// generators.
pub struct Walker<'g> {
    graph: &'g WeightedGraph,
    view: IsotropicView<'g>,
    start: LabeledTree,
    iterations: usize,
    k_requested: usize,
    k_effective: usize,
    ledger: std::sync::Arc<QueryLedger>,
    epsilon: f64,
}

impl<'g> Walker<'g> {
    pub fn new(
        graph: &'g WeightedGraph,
        config: &WalkConfig,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if graph.n() < 2 {
            return Err(Error::InvalidInput("walk needs at least 2 vertices".into()));
        }
        if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon {} outside (0, 1)",
                config.epsilon
            )));
        }
        if !graph.is_connected(true) {
            return Err(Error::Disconnected);
        }
        let ledger = std::sync::Arc::new(QueryLedger::new());
        let oracle = match config.oracle {
            OracleMode::Exact => build_exact_oracle(graph, ledger.clone())?,
            OracleMode::Sketch { epsilon } => {
                build_sketch_oracle(graph, epsilon, rng, ledger.clone())?
            }
        };
        let view = IsotropicView::build(graph, &oracle, config.lambda_mode)?;
        if !view.mixing_hypothesis_holds() {
            log::warn!(
                "fast-mixing hypothesis fails (m = {}, n = {}, lambda = {:.3}); \
                 the walk still targets the right distribution, only the \
                 iteration-count heuristic loses its backing",
                graph.m(),
                graph.n(),
                view.lambda()
            );
        }
        let start = LabeledTree::label_with_ones(&max_product_spanning_tree(graph, &ledger)?);
        let iterations = config
            .iterations
            .unwrap_or_else(|| default_iterations(graph.n(), config.epsilon, config.mixing_constant));
        if iterations < 1 {
            return Err(Error::InvalidInput("iteration count must be >= 1".into()));
        }
        let k_requested = config.k_fresh.unwrap_or(2 * graph.n());
        if config.k_fresh == Some(0) {
            return Err(Error::InvalidInput("k_fresh must be >= 1".into()));
        }
        let free = (view.m_prime() - (graph.n() as u64 - 1)) as usize;
        let k_effective = k_requested.min(free);
        Ok(Walker {
            graph,
            view,
            start,
            iterations,
            k_requested,
            k_effective,
            ledger,
            epsilon: config.epsilon,
        })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn view(&self) -> &IsotropicView<'g> {
        &self.view
    }

    pub fn ledger(&self) -> &std::sync::Arc<QueryLedger> {
        &self.ledger
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn k_requested(&self) -> usize {
        self.k_requested
    }

    pub fn k_effective(&self) -> usize {
        self.k_effective
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn start_tree(&self) -> &LabeledTree {
        &self.start
    }

    /// Copies in the expanded view (convenience passthrough).
    pub fn m_prime_probe(&self) -> u64 {
        self.view.m_prime()
    }

    /// One up-step plus one exact down-step.
    pub fn step(&self, state: &WalkState, rng: &mut impl Rng) -> Result<WalkState> {
        let fresh = iso_sample(&self.view, &state.tree, self.k_effective, rng, &self.ledger)?;
        let subgraph = subgraph_construct(&self.view, &state.tree, &fresh)?;
        debug_assert!(subgraph.is_connected_positive());
        let tree = self
            .ledger
            .time_phase(Phase::DownStep, || wilson_sample(&subgraph, rng))?;
        Ok(WalkState {
            tree,
            iteration: state.iteration + 1,
        })
    }

    /// Runs the walk for its configured depth and strips labels.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<SpanningTree> {
        self.sample_with_depth(self.iterations, rng)
    }

    /// Runs the walk for an explicit number of iterations (0 returns the
    /// start tree: the deterministic maximum weight-product tree).
    pub fn sample_with_depth(&self, depth: usize, rng: &mut impl Rng) -> Result<SpanningTree> {
        let mut state = WalkState {
            tree: self.start.clone(),
            iteration: 0,
        };
        for _ in 0..depth {
            state = self.step(&state, rng)?;
        }
        Ok(state.tree.strip_labels())
    }

    /// Closed-form charged cost for this walker after `samples` draws:
    /// oracle init (sketch only) + tree init + `samples * M` up-steps.
    pub fn expected_charged_total(&self, samples: usize, oracle: OracleMode) -> f64 {
        let m = self.graph.m() as f64;
        let n = self.graph.n() as f64;
        let init = match oracle {
            OracleMode::Exact => 0.0,
            OracleMode::Sketch { epsilon } => (m * n).sqrt() / epsilon,
        };
        let per_step = ((self.view.m_prime() as f64) * (self.k_effective as f64)).sqrt();
        init + (m * n).sqrt() + (samples * self.iterations) as f64 * per_step
    }
}

/// Single-shot convenience: prepare a walker and draw one tree.
pub fn sample_one(graph: &WeightedGraph, config: &WalkConfig, seed: u64) -> Result<SpanningTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let walker = Walker::new(graph, config, &mut rng)?;
    walker.sample(&mut rng)
}

const OPERATOR_GUARD: usize = 12;

fn check_operator_sizes(m: usize, k: usize, l: usize) -> Result<()> {
    if m > OPERATOR_GUARD {
        return Err(Error::GuardExceeded {
            what: "explicit operator",
            limit: OPERATOR_GUARD as u64,
            actual: m as u64,
        });
    }
    if l > k || k > m {
        return Err(Error::InvalidInput(format!(
            "operator sizes must satisfy l <= k <= m, got l={l}, k={k}, m={m}"
        )));
    }
    Ok(())
}

/// Row-stochastic matrix from k-subsets to l-subsets: mass `1/C(k,l)` on
/// every l-subset of the row's set. Rows and columns are ordered
/// lexicographically.
pub fn down_operator(m: usize, k: usize, l: usize) -> Result<DMatrix<f64>> {
    check_operator_sizes(m, k, l)?;
    let rows = k_subsets(m, k);
    let cols = k_subsets(m, l);
    let col_index: std::collections::HashMap<&[usize], usize> =
        cols.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mass = 1.0 / binomial(k, l) as f64;
    let mut d = DMatrix::zeros(rows.len(), cols.len());
    for (r, row_set) in rows.iter().enumerate() {
        for sub in k_subsets(k, l) {
            let t: Vec<usize> = sub.iter().map(|&i| row_set[i]).collect();
            d[(r, col_index[t.as_slice()])] += mass;
        }
    }
    Ok(d)
}

/// The up operator built from a distribution `mu` over k-subsets (given in
/// lexicographic order): row `T` puts mass `mu(S) / sum_{S' superset T} mu(S')`
/// on each k-superset `S`. Rows whose denominator vanishes (`T` not covered
/// by the support) are left all-zero and reported in `dead_rows`.
pub struct UpOperator {
    pub matrix: DMatrix<f64>,
    pub dead_rows: Vec<usize>,
}

pub fn up_operator(mu: &[f64], m: usize, k: usize, l: usize) -> Result<UpOperator> {
    check_operator_sizes(m, k, l)?;
    let cols = k_subsets(m, k);
    let rows = k_subsets(m, l);
    if mu.len() != cols.len() {
        return Err(Error::InvalidInput(format!(
            "mu has {} entries, expected C({m},{k}) = {}",
            mu.len(),
            cols.len()
        )));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { total });
    }
    let mut denom = vec![0.0; rows.len()];
    let row_index: std::collections::HashMap<&[usize], usize> =
        rows.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    for (c, col_set) in cols.iter().enumerate() {
        if mu[c] == 0.0 {
            continue;
        }
        for sub in k_subsets(k, l) {
            let t: Vec<usize> = sub.iter().map(|&i| col_set[i]).collect();
            denom[row_index[t.as_slice()]] += mu[c];
        }
    }
    let mut matrix = DMatrix::zeros(rows.len(), cols.len());
    let mut dead_rows = Vec::new();
    for (r, row_set) in rows.iter().enumerate() {
        if denom[r] == 0.0 {
            dead_rows.push(r);
            continue;
        }
        for (c, col_set) in cols.iter().enumerate() {
            if mu[c] > 0.0 && is_subset(row_set, col_set) {
                matrix[(r, c)] = mu[c] / denom[r];
            }
        }
    }
    Ok(UpOperator { matrix, dead_rows })
}

/// Diagnostics from [`chain_stationarity_check`].
#[derive(Debug, Clone)]
pub struct ChainReport {
    /// Number of labeled trees (chain states).
    pub states: usize,
    /// Copies in the explicit expanded multigraph.
    pub m_prime: usize,
    /// Extended set size `t`; each step redraws `t - (n-1)` fresh copies.
    pub extended_size: usize,
    /// `max_i |sum_j P(i,j) - 1|`.
    pub row_sum_error: f64,
    /// `max_j |(mu' P)(j) - mu'(j)|`.
    pub stationarity_error: f64,
    /// Max entrywise gap between the direct transition matrix and the
    /// complement-side down-then-up composition.
    pub complement_error: f64,
    /// `TV(1_x P^s, mu')` for `s = 0, 1, ...` from the labeled
    /// maximum weight-product tree.
    pub tv_series: Vec<f64>,
    /// Whether the TV series is nonincreasing (1e-12 slack).
    pub tv_monotone: bool,
    /// `max_{i,j} |P^S(i,j) - mu'(j)|` at `S = 64`.
    pub power_convergence_error: f64,
}

impl ChainReport {
    pub fn ok(&self) -> bool {
        self.row_sum_error < 1e-10
            && self.stationarity_error < 1e-10
            && self.complement_error < 1e-10
            && self.tv_monotone
            && self.power_convergence_error < 1e-8
    }
}

/// Builds the explicit transition matrix of the walk on the expanded
/// multigraph of `graph` (exact oracle, leverage-sum lambda) and verifies
/// stationarity, the complement-operator identity, and convergence from the
/// point-mass start. Guarded to `m' <= 12` copies.
pub fn chain_stationarity_check(graph: &WeightedGraph, t: Option<usize>) -> Result<ChainReport> {
    let ledger = std::sync::Arc::new(QueryLedger::new());
    let oracle = build_exact_oracle(graph, ledger.clone())?;
    let view = IsotropicView::build(graph, &oracle, LambdaRule::LeverageSum)?;
    let m_prime = view.m_prime() as usize;
    if m_prime > OPERATOR_GUARD {
        return Err(Error::GuardExceeded {
            what: "explicit chain",
            limit: OPERATOR_GUARD as u64,
            actual: m_prime as u64,
        });
    }
    let expanded = view.materialize();
    let k = graph.n() - 1;
    let t = t.unwrap_or_else(|| (graph.n() + 1).min(m_prime));
    if t < k + 1 || t > m_prime {
        return Err(Error::InvalidInput(format!(
            "extended size t = {t} must lie in [{}, {m_prime}]",
            k + 1
        )));
    }

    // States: labeled trees, as sorted copy-position sets.
    let position: std::collections::HashMap<_, _> = expanded
        .copies()
        .iter()
        .enumerate()
        .map(|(i, &(le, _))| (le, i))
        .collect();
    let labeled = enumerate_labeled_trees(&expanded)?;
    let states: Vec<Vec<usize>> = labeled
        .iter()
        .map(|(tree, _)| {
            let mut s: Vec<usize> = tree.edges().iter().map(|le| position[le]).collect();
            s.sort_unstable();
            s
        })
        .collect();
    let mu: Vec<f64> = labeled.iter().map(|&(_, p)| p).collect();
    let num = states.len();

    // Direct construction: average the conditional tree distribution over
    // every uniform extension of the current state.
    let mut p = DMatrix::<f64>::zeros(num, num);
    for (i, state) in states.iter().enumerate() {
        let comp = complement(m_prime, state);
        let extensions = k_subsets(comp.len(), t - k);
        let ext_mass = 1.0 / extensions.len() as f64;
        for ext in extensions {
            let mut union = state.clone();
            union.extend(ext.iter().map(|&x| comp[x]));
            union.sort_unstable();
            let inside: Vec<usize> = (0..num)
                .filter(|&j| is_subset(&states[j], &union))
                .collect();
            let denom: f64 = inside.iter().map(|&j| mu[j]).sum();
            for &j in &inside {
                p[(i, j)] += ext_mass * mu[j] / denom;
            }
        }
    }

    let row_sum_error = (0..num)
        .map(|i| (p.row(i).sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let mu_row = RowDVector::from_row_slice(&mu);
    let stationary = &mu_row * &p;
    let stationarity_error = (0..num)
        .map(|j| (stationary[j] - mu[j]).abs())
        .fold(0.0, f64::max);

    // Complement identity: walking down to (m'-t)-subsets and back up with
    // the complement distribution reproduces the same transition matrix.
    let complement_error = {
        let comp_k = m_prime - k;
        let comp_sets = k_subsets(m_prime, comp_k);
        let comp_index: std::collections::HashMap<&[usize], usize> = comp_sets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let mut mu_bar = vec![0.0; comp_sets.len()];
        let state_comp: Vec<usize> = states
            .iter()
            .map(|s| comp_index[complement(m_prime, s).as_slice()])
            .collect();
        for (idx, &ci) in state_comp.iter().enumerate() {
            mu_bar[ci] = mu[idx];
        }
        let down = down_operator(m_prime, comp_k, m_prime - t)?;
        let up = up_operator(&mu_bar, m_prime, comp_k, m_prime - t)?;
        let composed = down * up.matrix;
        let mut err = 0.0_f64;
        for (i, &ci) in state_comp.iter().enumerate() {
            for (j, &cj) in state_comp.iter().enumerate() {
                err = err.max((composed[(ci, cj)] - p[(i, j)]).abs());
            }
        }
        err
    };

    // Convergence from the labeled maximum weight-product tree.
    let start_tree = LabeledTree::label_with_ones(&max_product_spanning_tree(graph, &ledger)?);
    let mut start_set: Vec<usize> = start_tree.edges().iter().map(|le| position[le]).collect();
    start_set.sort_unstable();
    let x = states
        .iter()
        .position(|s| s == &start_set)
        .expect("labeled start tree is a chain state");
    let mut dist = RowDVector::zeros(num);
    dist[x] = 1.0;
    let mut tv_series = Vec::new();
    for _ in 0..=12 {
        let tv = 0.5
            * (0..num)
                .map(|j| (dist[j] - mu[j]).abs())
                .sum::<f64>();
        tv_series.push(tv);
        dist = &dist * &p;
    }
    let tv_monotone = tv_series.windows(2).all(|w| w[1] <= w[0] + 1e-12);

    let mut power = p.clone();
    for _ in 0..6 {
        power = &power * &power;
    }
    let power_convergence_error = (0..num)
        .flat_map(|i| (0..num).map(move |j| (i, j)))
        .map(|(i, j)| (power[(i, j)] - mu[j]).abs())
        .fold(0.0, f64::max);

    Ok(ChainReport {
        states: num,
        m_prime,
        extended_size: t,
        row_sum_error,
        stationarity_error,
        complement_error,
        tv_series,
        tv_monotone,
        power_convergence_error,
    })
}
