//! Instrumentation of oracle accesses: actual classical query counts plus the
//! quantum-equivalent costs charged by each emulated subroutine (all polylog
//! factors set to 1), and wall-clock per phase.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

/// Subroutines tracked by the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Resistance sketch construction; charged `sqrt(m n) / eps` per build.
    OracleInit,
    /// Maximum weight-product tree search; charged `sqrt(m n)` per call.
    TreeInit,
    /// Uniform copy sampling outside the current tree; charged
    /// `sqrt(m' k)` per call.
    IsoSample,
    /// Sampling with replacement from a copy domain; charged
    /// `sqrt(N k')` per call.
    MultiSample,
    /// Tree resampling in the constructed subgraph; wall-clock only.
    DownStep,
}

pub const PHASES: [Phase; 5] = [
    Phase::OracleInit,
    Phase::TreeInit,
    Phase::IsoSample,
    Phase::MultiSample,
    Phase::DownStep,
];

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::OracleInit => "oracle_init",
            Phase::TreeInit => "tree_init",
            Phase::IsoSample => "iso_sample",
            Phase::MultiSample => "multisample",
            Phase::DownStep => "down_step",
        }
    }

    fn index(&self) -> usize {
        match self {
            Phase::OracleInit => 0,
            Phase::TreeInit => 1,
            Phase::IsoSample => 2,
            Phase::MultiSample => 3,
            Phase::DownStep => 4,
        }
    }
}

#[derive(Default)]
struct PhaseCounters {
    calls: AtomicU64,
    /// f64 bits; accumulated with a CAS loop so concurrent charges are safe.
    charged_bits: AtomicU64,
    nanos: AtomicU64,
}

impl PhaseCounters {
    fn add_charge(&self, cost: f64) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.charged_bits
            .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |bits| {
                Some((f64::from_bits(bits) + cost).to_bits())
            })
            .ok();
    }
}

/// Monotone counters for oracle accesses and charged quantum-equivalent
/// query costs, one set per subroutine.
pub struct QueryLedger {
    oracle_queries: AtomicU64,
    phases: [PhaseCounters; 5],
}

impl Default for QueryLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        QueryLedger {
            oracle_queries: AtomicU64::new(0),
            phases: Default::default(),
        }
    }

    /// Records one actual classical resistance-oracle query.
    pub fn record_oracle_query(&self) {
        self.oracle_queries.fetch_add(1, Ordering::Relaxed);
    }

    /// Records one call of `phase` charged `cost` quantum-equivalent queries.
    pub fn charge(&self, phase: Phase, cost: f64) {
        self.phases[phase.index()].add_charge(cost);
    }

    pub fn add_time(&self, phase: Phase, elapsed: Duration) {
        self.phases[phase.index()]
            .nanos
            .fetch_add(elapsed.as_nanos() as u64, Ordering::Relaxed);
    }

    /// Runs `f`, attributing its wall-clock to `phase`.
    pub fn time_phase<T>(&self, phase: Phase, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.add_time(phase, start.elapsed());
        out
    }

    pub fn oracle_queries(&self) -> u64 {
        self.oracle_queries.load(Ordering::Relaxed)
    }

    pub fn calls(&self, phase: Phase) -> u64 {
        self.phases[phase.index()].calls.load(Ordering::Relaxed)
    }

    pub fn charged(&self, phase: Phase) -> f64 {
        f64::from_bits(self.phases[phase.index()].charged_bits.load(Ordering::Relaxed))
    }

    pub fn wall(&self, phase: Phase) -> Duration {
        Duration::from_nanos(self.phases[phase.index()].nanos.load(Ordering::Relaxed))
    }

    pub fn charged_total(&self) -> f64 {
        PHASES.iter().map(|p| self.charged(*p)).sum()
    }
}
