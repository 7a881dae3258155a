//! Uniform k-subset sampling from weighted copy domains.
//!
//! A draw with replacement picks an edge proportionally to its copy count and
//! then a copy index uniformly; conditioning a with-replacement batch on
//! distinctness yields an exactly uniform k-subset, so a batch of
//! `ceil(3 k ln(k+2))` draws is scanned for its first k distinct labels and
//! re-drawn on the rare failure.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::isotropic::{IsotropicView, LabeledEdge, LabeledTree};
use crate::ledger::{Phase, QueryLedger};

/// Retry budget for fresh oversampling batches; the per-batch failure
/// probability is below 1/3, so exhausting this is a hard error rather than
/// a plausible event.
pub const MAX_BATCHES: usize = 20;

/// Per-edge copy counts with a prefix-sum index for O(log m) draws.
pub struct CopyDomain {
    counts: Vec<usize>,
    prefix: Vec<u64>,
}

impl CopyDomain {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let mut prefix = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for &q in &counts {
            acc += q as u64;
            prefix.push(acc);
        }
        Ok(CopyDomain { counts, prefix })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total number of copies.
    pub fn total(&self) -> u64 {
        *self.prefix.last().unwrap_or(&0)
    }

    /// Maps a flat copy index in `[0, total)` to its labeled edge.
    fn unrank(&self, r: u64) -> LabeledEdge {
        debug_assert!(r < self.total());
        let edge = match self.prefix.binary_search(&r) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        LabeledEdge {
            edge,
            copy: (r - self.prefix[edge]) as u32 + 1,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> LabeledEdge {
        self.unrank(rng.random_range(0..self.total()))
    }
}

/// `count` independent uniform draws over the domain's copies. Charges
/// `sqrt(N * count)` quantum-equivalent queries.
pub fn sample_with_replacement(
    domain: &CopyDomain,
    count: usize,
    rng: &mut impl Rng,
    ledger: &QueryLedger,
) -> Result<Vec<LabeledEdge>> {
    let n = domain.total();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    ledger.charge(Phase::MultiSample, ((n as f64) * (count as f64)).sqrt());
    Ok((0..count).map(|_| domain.draw(rng)).collect())
}

/// Oversampling batch size for a target of `k` distinct elements.
pub fn oversample_count(k: usize) -> usize {
    (3.0 * k as f64 * ((k + 2) as f64).ln()).ceil() as usize
}

/// Scans `draws` in order and collects the first `k` distinct elements;
/// `None` if fewer than `k` distinct values appear.
fn first_k_distinct(draws: &[LabeledEdge], k: usize) -> Option<Vec<LabeledEdge>> {
    let mut seen = HashSet::with_capacity(2 * k);
    let mut out = Vec::with_capacity(k);
    for &le in draws {
        if seen.insert(le) {
            out.push(le);
            if out.len() == k {
                return Some(out);
            }
        }
    }
    None
}

/// Uniformly random k-subset of the domain's copies, sorted. Each attempt
/// draws a fresh with-replacement batch; failures are retried up to
/// [`MAX_BATCHES`] times.
pub fn k_subset_sample(
    domain: &CopyDomain,
    k: usize,
    rng: &mut impl Rng,
    ledger: &QueryLedger,
) -> Result<Vec<LabeledEdge>> {
    if k as u64 > domain.total() {
        return Err(Error::SubsetTooLarge {
            requested: k,
            available: domain.total(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let batch = oversample_count(k);
    for _ in 0..MAX_BATCHES {
        let draws = sample_with_replacement(domain, batch, rng, ledger)?;
        if let Some(mut subset) = first_k_distinct(&draws, k) {
            subset.sort_unstable();
            return Ok(subset);
        }
    }
    Err(Error::RetriesExhausted { attempts: MAX_BATCHES })
}

/// Uniformly random k-subset of the view's copies excluding the labels
/// occupied by `tree`, sorted. Charges `sqrt(m' * k)` quantum-equivalent
/// queries per call; draws go through per-edge effective counts
/// `q_e - #(occupied labels of e)` so occupied labels are never produced.
pub fn iso_sample(
    view: &IsotropicView,
    tree: &LabeledTree,
    k: usize,
    rng: &mut impl Rng,
    ledger: &QueryLedger,
) -> Result<Vec<LabeledEdge>> {
    let start = std::time::Instant::now();
    let mut occupied: HashMap<usize, Vec<u32>> = HashMap::with_capacity(tree.len());
    for &le in tree.edges() {
        view.validate_label(le)?;
        occupied.entry(le.edge).or_default().push(le.copy);
    }
    for labels in occupied.values_mut() {
        labels.sort_unstable();
    }

    let mut effective = Vec::with_capacity(view.copy_counts().len());
    for (edge, &q) in view.copy_counts().iter().enumerate() {
        let occ = occupied.get(&edge).map_or(0, |l| l.len());
        effective.push(q - occ);
    }
    let eligible = view.m_prime() - tree.len() as u64;
    if k as u64 > eligible {
        return Err(Error::SubsetTooLarge {
            requested: k,
            available: eligible,
        });
    }
    ledger.charge(
        Phase::IsoSample,
        ((view.m_prime() as f64) * (k as f64)).sqrt(),
    );
    if k == 0 {
        ledger.add_time(Phase::IsoSample, start.elapsed());
        return Ok(Vec::new());
    }

    let domain = CopyDomain::new(effective)?;
    let batch = oversample_count(k);
    let mut result = None;
    for _ in 0..MAX_BATCHES {
        let draws: Vec<LabeledEdge> = (0..batch)
            .map(|_| {
                let slot = domain.draw(rng);
                LabeledEdge {
                    edge: slot.edge,
                    copy: actual_label(slot.copy, occupied.get(&slot.edge)),
                }
            })
            .collect();
        if let Some(mut subset) = first_k_distinct(&draws, k) {
            subset.sort_unstable();
            result = Some(subset);
            break;
        }
    }
    ledger.add_time(Phase::IsoSample, start.elapsed());
    result.ok_or(Error::RetriesExhausted { attempts: MAX_BATCHES })
}

/// Maps the `slot`-th free label (1-based) of an edge to its actual copy
/// index, skipping the sorted occupied labels.
fn actual_label(slot: u32, occupied: Option<&Vec<u32>>) -> u32 {
    let mut label = slot;
    if let Some(occ) = occupied {
        for &o in occ {
            if o <= label {
                label += 1;
            } else {
                break;
            }
        }
    }
    label
}
