//! Desk-scale experiments on redundancy-bounded reductions between halting
//! probabilities: exact dyadic arithmetic, finite prefix-free machines,
//! Solovay tests, partitions, the diagonal construction and its prediction
//! equivalence.

pub mod bitreal;
pub mod machine;
pub mod report;
pub mod series;
pub mod randomness;
pub mod reduction;
pub mod beta;
pub mod cli;
