//! The block-structured redundancy function that defeats every partition.
//!
//! Positions are cut into consecutive blocks `I_1, I_2, ...` with
//! `|I_j| = m_j = 2^(2^j + j)`, and `g = log2 m_j = 2^j + j` on `I_j`. Each
//! block contributes exactly 1 to `sum 2^-g(n)`, so that sum diverges, yet
//! any partition that hits a block densely enough pays at least `1/4` in
//! `sum 2^(t_i - t_(i+1))` inside it.

use std::ops::RangeInclusive;

use serde::Serialize;

use super::partition::PartitionSequence;
use super::SeriesError;
use crate::bitreal::DyadicRational;

/// Largest block index materialized at desk scale (`m_4 = 2^20`).
pub const MAX_BLOCK: u32 = 4;

/// `log2 m_j = 2^j + j`.
pub fn block_log_size(j: u32) -> u64 {
    (1u64 << j) + j as u64
}

/// `m_j = 2^(2^j + j)`.
pub fn block_size(j: u32) -> Result<u64, SeriesError> {
    if j == 0 || j > MAX_BLOCK {
        return Err(SeriesError::BlockTooLarge(j));
    }
    Ok(1u64 << block_log_size(j))
}

/// The positions of block `I_j`.
pub fn adversarial_block(j: u32) -> Result<RangeInclusive<u64>, SeriesError> {
    block_size(j)?;
    let start = 1 + (1..j).map(|i| 1u64 << block_log_size(i)).sum::<u64>();
    Ok(start..=start + (1u64 << block_log_size(j)) - 1)
}

/// Index `j` of the block containing `n >= 1`.
pub fn block_of(n: u64) -> Result<u32, SeriesError> {
    let mut end = 0u64;
    for j in 1..=MAX_BLOCK {
        end += 1u64 << block_log_size(j);
        if n <= end {
            return Ok(j);
        }
    }
    Err(SeriesError::BlockTooLarge(MAX_BLOCK + 1))
}

/// `g(n) = 2^j + j` for `n` in block `j`; `g(0) = 0`.
pub fn adversarial_g(n: u64) -> Result<u64, SeriesError> {
    if n == 0 {
        return Ok(0);
    }
    Ok(block_log_size(block_of(n)?))
}

/// `sum_{n in I_j} 2^-g(n)`, summed term by term.
pub fn block_weight(j: u32) -> Result<DyadicRational, SeriesError> {
    let block = adversarial_block(j)?;
    let mut total = DyadicRational::zero();
    for n in block {
        total = &total + &DyadicRational::pow2_neg(adversarial_g(n)?);
    }
    Ok(total)
}

/// Per-block findings of [`adversary_analyze`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockAnalysis {
    pub block: u32,
    pub block_len: u64,
    /// `|J_n(t)|`: markers `t_i` inside the block.
    pub markers: u64,
    /// `|J_n(t)| > |I_n| * 2^-n`.
    pub in_d: bool,
    /// `sum 2^(t_i - t_(i+1))` over consecutive markers both inside the block.
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub block_sum: DyadicRational,
    /// `in_d` and `block_sum < 1/4`; must never happen.
    pub counterexample: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdversaryReport {
    pub blocks: Vec<BlockAnalysis>,
}

impl AdversaryReport {
    pub fn counterexamples(&self) -> usize {
        self.blocks.iter().filter(|b| b.counterexample).count()
    }
}

/// Markers of `t` per block, with the intra-block gap sums.
pub fn adversary_analyze(t: &PartitionSequence, jmax: u32) -> Result<AdversaryReport, SeriesError> {
    if jmax > MAX_BLOCK {
        return Err(SeriesError::BlockTooLarge(jmax));
    }
    let quarter = DyadicRational::pow2_neg(2);
    let mut blocks = Vec::new();
    for j in 1..=jmax {
        let range = adversarial_block(j)?;
        let inside: Vec<u64> = t
            .positions()
            .iter()
            .copied()
            .filter(|p| range.contains(p))
            .collect();
        let block_len = range.end() - range.start() + 1;
        let markers = inside.len() as u64;
        // |I_n| 2^-n = 2^(2^n): compare without fractions
        let in_d = markers > block_len >> j;
        let block_sum: DyadicRational = inside
            .windows(2)
            .map(|w| DyadicRational::pow2_neg(w[1] - w[0]))
            .sum();
        let counterexample = in_d && block_sum < quarter;
        blocks.push(BlockAnalysis {
            block: j,
            block_len,
            markers,
            in_d,
            block_sum,
            counterexample,
        });
    }
    Ok(AdversaryReport { blocks })
}

/// Positions `1..=end of block jmax`.
pub fn unit_gap_partition(jmax: u32) -> Result<PartitionSequence, SeriesError> {
    let end = *adversarial_block(jmax)?.end();
    PartitionSequence::user((1..=end).collect())
}

/// In each block, `count(j)` markers spread as evenly as integer positions
/// allow, first and last on the block ends.
pub fn even_partition(jmax: u32, count: impl Fn(u32) -> u64) -> Result<PartitionSequence, SeriesError> {
    let mut pos = Vec::new();
    for j in 1..=jmax {
        let range = adversarial_block(j)?;
        let (a, len) = (*range.start(), range.end() - range.start() + 1);
        let c = count(j).min(len);
        if c == 1 {
            pos.push(a);
        } else if c > 1 {
            let span = len - 1;
            pos.extend((0..c).map(|i| a + i * span / (c - 1)));
        }
    }
    PartitionSequence::user(pos)
}

/// Markers sampled independently per block, with a per-block density drawn
/// from the seed so that some blocks land in `D(t)` and some do not.
pub fn random_partition(seed: u64, jmax: u32) -> Result<PartitionSequence, SeriesError> {
    use rand::seq::index::sample;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pos = Vec::new();
    for j in 1..=jmax {
        let range = adversarial_block(j)?;
        let (a, len) = (*range.start(), range.end() - range.start() + 1);
        let threshold = len >> j;
        // around the D(t) threshold, up to a full block
        let c = match rng.gen_range(0..4) {
            0 => rng.gen_range(0..=threshold),
            1 => threshold + 1,
            2 => rng.gen_range(threshold + 1..=(4 * threshold).min(len)),
            _ => rng.gen_range(threshold + 1..=len),
        };
        let mut chosen: Vec<u64> = sample(&mut rng, len as usize, c as usize)
            .into_iter()
            .map(|i| a + i as u64)
            .collect();
        chosen.sort_unstable();
        pos.extend(chosen);
    }
    PartitionSequence::user(pos)
}
