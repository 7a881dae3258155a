//! Random spanning tree sampling via large-step down-up walks.
//!
//! The sampler targets the distribution over spanning trees where each tree
//! carries probability proportional to the product of its edge weights. One
//! draw works on a copy-expanded view of the graph whose copy counts come
//! from (approximate) effective resistances: starting from the maximum
//! weight-product tree, every iteration pulls a batch of fresh copies
//! uniformly from outside the current tree and then resamples a tree exactly
//! within the union.
//!
//! Alongside the walk itself the crate carries everything needed to certify
//! it: exact reference samplers and enumeration oracles ([`exact`]),
//! resistance oracles with an overestimating sketch backend ([`resistance`]),
//! distribution metrics and mixing curves ([`verify`]), the one-hot search
//! graph family ([`gadget`]), and a ledger of classical oracle calls plus
//! formula-based quantum-equivalent query charges ([`ledger`]).

pub mod error;
pub mod exact;
pub mod family;
pub mod gadget;
pub mod graph;
pub mod isotropic;
pub mod ledger;
pub mod multisample;
pub mod parallel;
pub mod resistance;
pub mod subsets;
pub mod verify;
pub mod walk;

mod solve;
mod util;

pub use error::{Error, ParseErrorKind, Result};
pub use graph::{SpanningTree, WeightedGraph};
pub use isotropic::{IsotropicView, LabeledEdge, LabeledTree, LambdaRule};
pub use ledger::{Phase, QueryLedger};
pub use resistance::{LeverageVector, OracleMode, ResistanceOracle};
pub use walk::{WalkConfig, Walker};

/// Derives an independent stream seed from a base seed (SplitMix64
/// finalizer over the pair).
pub fn child_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
