use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::certified::{log2_bounds, log2_int_bounds};
use super::interval::Interval;
use super::redundancy::{RedundancyFunction, MAX_PREC};
use super::SeriesError;
use crate::bitreal::DyadicRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Lemma33,
    UserSupplied,
}

/// A strictly increasing sequence of positions `t_1 < t_2 < ...`, 1-indexed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSequence {
    positions: Vec<u64>,
    provenance: Provenance,
}

impl PartitionSequence {
    pub fn new(positions: Vec<u64>, provenance: Provenance) -> Result<Self, SeriesError> {
        if let Some(i) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SeriesError::InvalidPartition(format!(
                "not strictly increasing at index {}",
                i + 2
            )));
        }
        Ok(PartitionSequence {
            positions,
            provenance,
        })
    }

    pub fn user(positions: Vec<u64>) -> Result<Self, SeriesError> {
        Self::new(positions, Provenance::UserSupplied)
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `t_i` for `1 <= i <= len`.
    pub fn t(&self, i: usize) -> Option<u64> {
        i.checked_sub(1).and_then(|j| self.positions.get(j)).copied()
    }

    /// Least index with `t_i >= 1`; earlier entries lie below the position
    /// range and are ignored by consumers.
    pub fn first_positive_index(&self) -> Option<usize> {
        self.positions.iter().position(|&p| p >= 1).map(|i| i + 1)
    }
}

/// `t_k = floor(sum_{i<=k} (log i + 2 log log i))` for `k = 1..=kmax`, with
/// `log 0 = log 1 = 0`.
///
/// Each partial sum is enclosed with dyadic bounds; if some floor is not
/// certified the whole sum is redone at twice the precision.
pub fn lemma33_partition(kmax: usize) -> Result<PartitionSequence, SeriesError> {
    let mut prec = 48;
    loop {
        match lemma33_at_precision(kmax, prec) {
            Ok(t) => return PartitionSequence::new(t, Provenance::Lemma33),
            Err(_) if prec < MAX_PREC => prec *= 2,
            Err(k) => return Err(SeriesError::Unresolved(k as u64)),
        }
    }
}

fn lemma33_at_precision(kmax: usize, prec: u32) -> Result<Vec<u64>, usize> {
    let scale = prec as u64;
    let mut lo = BigUint::zero();
    let mut hi = BigUint::zero();
    let mut out = Vec::with_capacity(kmax);
    for i in 1..=kmax as u64 {
        let l = log2_int_bounds(i, prec);
        let ll = log2_bounds(&l, prec);
        lo += l.lo.floor_at_scale(scale) + (ll.lo.floor_at_scale(scale) << 1u32);
        hi += l.hi.ceil_at_scale(scale) + (ll.hi.ceil_at_scale(scale) << 1u32);
        let t_lo = &lo >> scale;
        let t_hi = &hi >> scale;
        if t_lo != t_hi {
            return Err(i as usize);
        }
        out.push(t_lo.to_u64().expect("position fits in u64"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    /// First index considered (`t_i >= 1`).
    pub start: usize,
    /// Last index `K` of the partial sums.
    pub k_max: usize,
    /// Least index from which `t_i + g(t_i) < t_(i+1)` holds through `K`;
    /// `None` when it fails at `K`.
    pub k0: Option<usize>,
    /// Number of indices in `[start, K]` where the separation fails.
    pub violations: usize,
    /// `sum_{start<=i<=K} 2^-g(t_i)`.
    #[serde(serialize_with = "crate::report::ser_interval")]
    pub div_partial: Interval,
    /// `sum_{start<=i<=K} 2^(t_i - t_(i+1))`, exact.
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub conv_partial: DyadicRational,
}

/// Separation index, divergent and convergent partial sums of a partition.
/// Needs `t_(K+1)`.
pub fn verify_partition(
    t: &PartitionSequence,
    g: &RedundancyFunction,
    k_max: usize,
) -> Result<PartitionReport, SeriesError> {
    if t.len() < k_max + 1 {
        return Err(SeriesError::InvalidPartition(format!(
            "need {} terms, have {}",
            k_max + 1,
            t.len()
        )));
    }
    let start = t
        .first_positive_index()
        .ok_or_else(|| SeriesError::InvalidPartition("no positive positions".into()))?;
    let mut k0 = None;
    let mut violations = 0;
    let mut div = Interval::zero();
    let mut conv = DyadicRational::zero();
    for i in start..=k_max {
        let ti = t.t(i).expect("in range");
        let next = t.t(i + 1).expect("in range");
        let gap = next - ti;
        // t + g(t) < next  <=>  g(t) < gap  <=>  floor(g(t)) < gap, gap integral
        let separated = g.floor_g(ti)? < gap;
        if separated {
            k0.get_or_insert(i);
        } else {
            violations += 1;
            k0 = None;
        }
        div = div + g.term(ti)?;
        conv = &conv + &DyadicRational::pow2_neg(gap);
    }
    Ok(PartitionReport {
        start,
        k_max,
        k0,
        violations,
        div_partial: div,
        conv_partial: conv,
    })
}

/// One CSV row per index: `(i, t_i, g(t_i), floor_eval(t_i + g(t_i)), t_(i+1) - t_i)`.
pub fn partition_rows(
    t: &PartitionSequence,
    g: &RedundancyFunction,
) -> Result<Vec<PartitionRow>, SeriesError> {
    (1..t.len())
        .map(|i| {
            let ti = t.t(i).expect("in range");
            Ok(PartitionRow {
                i,
                t: ti,
                g: g.bounds(ti, 32)?.rounded_outward(32).to_string(),
                use_bound: g.floor_eval(ti)?,
                gap: t.t(i + 1).expect("in range") - ti,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionRow {
    pub i: usize,
    pub t: u64,
    pub g: String,
    pub use_bound: u64,
    pub gap: u64,
}
