//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// What went wrong on a single line of an edge-list document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed header, expected `n m`")]
    Header,
    #[error("malformed edge line, expected `u v w`")]
    MalformedLine,
    #[error("self-loop")]
    SelfLoop,
    #[error("negative weight")]
    NegativeWeight,
    #[error("non-finite weight")]
    NonFiniteWeight,
    #[error("vertex index out of range")]
    VertexOutOfRange,
    #[error("duplicate edge")]
    DuplicateEdge,
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("graph is not connected on positive-weight edges")]
    Disconnected,

    #[error("not a spanning tree: {0}")]
    InvalidTree(String),

    #[error("accuracy parameter {0} outside (0, 1/3)")]
    EpsilonOutOfRange(f64),

    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("copy label ({edge}, {copy}) out of range: edge has {count} copies")]
    InvalidLabel { edge: usize, copy: u32, count: usize },

    #[error("labeled edge ({edge}, {copy}) selected twice")]
    OverlappingSelection { edge: usize, copy: u32 },

    #[error("copy domain is empty")]
    EmptyDomain,

    #[error("requested subset of size {requested} from {available} eligible copies")]
    SubsetTooLarge { requested: usize, available: u64 },

    #[error("no subset of distinct draws found after {attempts} batches")]
    RetriesExhausted { attempts: usize },

    #[error("{what} guard exceeded: {actual} > {limit}")]
    GuardExceeded {
        what: &'static str,
        limit: u64,
        actual: u64,
    },

    #[error("all spanning trees have zero weight product")]
    ZeroTotalWeight,

    #[error("distribution is not normalized (total {total})")]
    Unnormalized { total: f64 },

    #[error("support violation: first distribution puts mass outside the second")]
    SupportViolation,

    #[error("linear solver did not reach tolerance within {iterations} iterations")]
    SolverStalled { iterations: usize },

    #[error("invalid search matrix: {0}")]
    InvalidSearchMatrix(String),

    #[error("recovery failed: right vertex {vertex} has tree degree {degree} toward left vertices")]
    RecoveryFailed { vertex: usize, degree: usize },

    #[error("{0}")]
    InvalidInput(String),
}
