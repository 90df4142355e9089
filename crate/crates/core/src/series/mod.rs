//! Redundancy functions with certified floors, convergence diagnostics,
//! partitions, the adversarial function and marker minimization.

pub mod adversary;
pub mod certified;
pub mod convergence;
pub mod interval;
pub mod markers;
pub mod partition;
pub mod redundancy;

use thiserror::Error;

pub use adversary::{adversarial_block, adversarial_g, adversary_analyze, AdversaryReport};
pub use certified::Bounds;
pub use convergence::{condensation_compare, partial_sum, Summand};
pub use interval::Interval;
pub use markers::{brute_force_min, marker_lower_bounds, min_marker_sum};
pub use partition::{lemma33_partition, verify_partition, PartitionReport, PartitionSequence, Provenance};
pub use redundancy::{Epsilon, RedundancyFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("epsilon below 1 unsupported: {0}")]
    EpsilonBelowOne(String),
    #[error("block too large: j = {0}")]
    BlockTooLarge(u32),
    #[error("floor of n + g(n) not certified at n = {0}")]
    Unresolved(u64),
    #[error("function is not nonincreasing/nondecreasing at n = {0}")]
    NotMonotone(u64),
    #[error("no composition of {m} into {k} positive parts")]
    NoComposition { m: u64, k: u64 },
    #[error("brute force limited to span <= 24, got {0}")]
    BruteForceCap(u64),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("table-defined function needs at least one value")]
    EmptyTable,
    #[error("series diverges")]
    Divergent,
    #[error("value does not fit")]
    Overflow,
    #[error("cannot parse {0:?}")]
    Parse(String),
}
