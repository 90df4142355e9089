//! Patterns on disjoint position sets and the measure of strings missing
//! all of them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::RandomnessError;
use crate::bitreal::{BitPrefix, DyadicRational};

/// Largest position accepted by [`brute_force_miss_measure`].
pub const BRUTE_FORCE_MAX_POSITION: usize = 24;

/// Whether `x` carries `sigma` along the 1-based positions `b`, in order.
pub fn meets(x: &BitPrefix, sigma: &BitPrefix, b: &[usize]) -> Result<bool, RandomnessError> {
    if sigma.len() != b.len() {
        return Err(RandomnessError::SizeMismatch {
            positions: b.len(),
            sigma: sigma.len(),
        });
    }
    for (&p, &want) in b.iter().zip(sigma.bits()) {
        if p == 0 {
            return Err(RandomnessError::PositionZero);
        }
        if p > x.len() {
            return Err(RandomnessError::BeyondPrefix { pos: p, len: x.len() });
        }
        if x.bits()[p - 1] != want {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    positions: Vec<usize>,
    sigma: BitPrefix,
}

impl Block {
    pub fn new(positions: Vec<usize>, sigma: BitPrefix) -> Result<Self, RandomnessError> {
        if positions.len() != sigma.len() {
            return Err(RandomnessError::SizeMismatch {
                positions: positions.len(),
                sigma: sigma.len(),
            });
        }
        if positions.contains(&0) {
            return Err(RandomnessError::PositionZero);
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RandomnessError::Unsorted);
        }
        Ok(Block { positions, sigma })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn sigma(&self) -> &BitPrefix {
        &self.sigma
    }

    /// `(mask, pattern)` over bit `p - 1` for position `p`.
    fn mask_pattern(&self) -> (u32, u32) {
        let mut mask = 0;
        let mut pattern = 0;
        for (&p, &b) in self.positions.iter().zip(self.sigma.bits()) {
            mask |= 1 << (p - 1);
            pattern |= (b as u32) << (p - 1);
        }
        (mask, pattern)
    }
}

/// Blocks on pairwise disjoint position sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockFamily {
    blocks: Vec<Block>,
}

impl BlockFamily {
    pub fn new(blocks: Vec<Block>) -> Result<Self, RandomnessError> {
        let mut seen = BTreeSet::new();
        for b in &blocks {
            for &p in &b.positions {
                if !seen.insert(p) {
                    return Err(RandomnessError::NotDisjoint(p));
                }
            }
        }
        Ok(BlockFamily { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Largest position used, 0 for an empty family.
    pub fn max_position(&self) -> usize {
        self.blocks
            .iter()
            .filter_map(|b| b.positions.last())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Whether `x` meets some block.
    pub fn meets_any(&self, x: &BitPrefix) -> Result<bool, RandomnessError> {
        for b in &self.blocks {
            if meets(x, &b.sigma, &b.positions)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Disjoint blocks with random sizes and patterns inside `1..=max_position`.
    pub fn random(seed: u64, max_position: usize) -> BlockFamily {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<usize> = (1..=max_position).collect();
        pool.shuffle(&mut rng);
        let mut blocks = Vec::new();
        let count = rng.gen_range(0..=6usize);
        for _ in 0..count {
            if pool.is_empty() {
                break;
            }
            let size = rng.gen_range(1..=pool.len().min(5));
            let mut positions = pool.split_off(pool.len() - size);
            positions.sort_unstable();
            let sigma = BitPrefix::new((0..size).map(|_| rng.gen_bool(0.5)).collect());
            blocks.push(Block::new(positions, sigma).expect("sorted, sized"));
        }
        BlockFamily::new(blocks).expect("drawn without replacement")
    }
}

impl FromStr for BlockFamily {
    type Err = RandomnessError;

    /// One block per line: `p1,p2,... ; bits`. `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut blocks = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| RandomnessError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (pos, sigma) = line.split_once(';').ok_or_else(|| err("expected `positions ; bits`"))?;
            let positions = pos
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| err("bad position")))
                .collect::<Result<Vec<_>, _>>()?;
            let sigma = sigma.trim().parse().map_err(|_| err("pattern must be a bit string"))?;
            blocks.push(Block::new(positions, sigma)?);
        }
        BlockFamily::new(blocks)
    }
}

impl fmt::Display for BlockFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let pos: Vec<String> = b.positions.iter().map(usize::to_string).collect();
            writeln!(f, "{} ; {}", pos.join(","), b.sigma)?;
        }
        Ok(())
    }
}

/// `prod (1 - 2^-|B_i|)`, the measure of reals meeting no block.
pub fn exact_miss_measure(fam: &BlockFamily) -> DyadicRational {
    let one = DyadicRational::one();
    fam.blocks.iter().fold(one.clone(), |acc, b| {
        let miss = one
            .checked_sub(&DyadicRational::pow2_neg(b.positions.len() as u64))
            .expect("2^-b <= 1");
        &acc * &miss
    })
}

/// Fraction of the `2^M` strings of length `M = max position` meeting no
/// block, by enumeration.
pub fn brute_force_miss_measure(fam: &BlockFamily) -> Result<DyadicRational, RandomnessError> {
    let m = fam.max_position();
    if m > BRUTE_FORCE_MAX_POSITION {
        return Err(RandomnessError::PositionCap {
            max: m,
            cap: BRUTE_FORCE_MAX_POSITION,
        });
    }
    let checks: Vec<(u32, u32)> = fam.blocks.iter().map(Block::mask_pattern).collect();
    let misses = |x: u32| checks.iter().all(|&(mask, pat)| x & mask != pat);
    // split on the top bits only when there is enough work to share
    let low = m.min(16);
    let high = m - low;
    let count: u64 = (0u32..1 << high)
        .into_par_iter()
        .map(|h| {
            let base = h << low;
            (0u32..1 << low).filter(|&l| misses(base | l)).count() as u64
        })
        .sum();
    Ok(DyadicRational::new(count, m as u64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductSumRow {
    pub i: usize,
    pub b: u64,
    /// `prod_{j<=i} (1 - 2^-b_j)`
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub product: DyadicRational,
    /// `sum_{j<=i} 2^-b_j`
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub sum: DyadicRational,
}

/// Running product and sum side by side, exactly.
pub fn product_sum_report(b: &[u64]) -> Vec<ProductSumRow> {
    let one = DyadicRational::one();
    let mut product = one.clone();
    let mut sum = DyadicRational::zero();
    b.iter()
        .enumerate()
        .map(|(i, &bi)| {
            let term = DyadicRational::pow2_neg(bi);
            product = &product * &one.checked_sub(&term).expect("2^-b <= 1");
            sum = &sum + &term;
            ProductSumRow {
                i: i + 1,
                b: bi,
                product: product.clone(),
                sum: sum.clone(),
            }
        })
        .collect()
}
