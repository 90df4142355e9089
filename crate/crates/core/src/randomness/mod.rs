//! Solovay tests, block families with exact miss measures, martingales built
//! from prediction rules, and the zero-block scan.

pub mod blocks;
pub mod martingale;
pub mod solovay;
pub mod zero_block;

use thiserror::Error;

pub use blocks::{
    brute_force_miss_measure, exact_miss_measure, meets, product_sum_report, Block, BlockFamily,
};
pub use martingale::{Martingale, PredictionRule, RuleFn, TableRule};
pub use solovay::SolovayTest;
pub use zero_block::zero_block_scan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomnessError {
    #[error("pattern has {sigma} bits but the position set has {positions}")]
    SizeMismatch { positions: usize, sigma: usize },
    #[error("positions are 1-based; got 0")]
    PositionZero,
    #[error("positions must be strictly increasing within a block")]
    Unsorted,
    #[error("position {0} appears in two blocks")]
    NotDisjoint(usize),
    #[error("position {pos} beyond prefix length {len}")]
    BeyondPrefix { pos: usize, len: usize },
    #[error("brute force limited to positions <= {cap}, got {max}")]
    PositionCap { max: usize, cap: usize },
    #[error("martingale depth {depth} exceeded by length {len}")]
    DepthExceeded { depth: usize, len: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Series(#[from] crate::series::SeriesError),
}
