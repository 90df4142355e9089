//! Minimum of `sum 2^-a_i` over compositions of a span into `k` positive gaps.

use rayon::prelude::*;
use serde::Serialize;

use super::certified::{pow2_neg_ratio_bounds, Bounds};
use super::SeriesError;
use crate::bitreal::DyadicRational;

/// Largest span accepted by [`brute_force_min`].
pub const BRUTE_FORCE_MAX_SPAN: u64 = 24;

fn check(m: u64, k: u64) -> Result<(), SeriesError> {
    if k == 0 || m < k {
        return Err(SeriesError::NoComposition { m, k });
    }
    Ok(())
}

/// Balanced gaps: `r` gaps of `ceil(m/k)` and `k - r` of `floor(m/k)`,
/// `r = m mod k`.
pub fn min_marker_sum(m: u64, k: u64) -> Result<DyadicRational, SeriesError> {
    check(m, k)?;
    let (q, r) = (m / k, m % k);
    let long = DyadicRational::pow2_neg(q + 1).mul_u64(r);
    let short = DyadicRational::pow2_neg(q).mul_u64(k - r);
    Ok(&long + &short)
}

/// Minimum over every composition of `m` into `k` positive parts, by
/// enumeration.
pub fn brute_force_min(m: u64, k: u64) -> Result<DyadicRational, SeriesError> {
    check(m, k)?;
    if m > BRUTE_FORCE_MAX_SPAN {
        return Err(SeriesError::BruteForceCap(m));
    }
    // Sums are scaled by 2^m so that 2^-a becomes the integer 2^(m-a).
    let best = (1..=m - (k - 1))
        .into_par_iter()
        .map(|first| {
            let mut best = u64::MAX;
            walk(m - first, k - 1, m, 1 << (m - first), &mut best);
            best
        })
        .min()
        .expect("nonempty");
    Ok(DyadicRational::new(best, m))
}

/// Enumerate compositions of `rest` into `parts` parts, tracking the
/// running scaled sum.
fn walk(rest: u64, parts: u64, m: u64, acc: u64, best: &mut u64) {
    if parts == 0 {
        if rest == 0 && acc < *best {
            *best = acc;
        }
        return;
    }
    for a in 1..=rest - (parts - 1) {
        walk(rest - a, parts - 1, m, acc + (1 << (m - a)), best);
    }
}

/// `(k 2^-ceil(m/k), k 2^(-m/k - 1))`, the second enclosed.
pub fn marker_lower_bounds(m: u64, k: u64) -> Result<(DyadicRational, Bounds), SeriesError> {
    check(m, k)?;
    let first = DyadicRational::pow2_neg(m.div_ceil(k)).mul_u64(k);
    let second = pow2_neg_ratio_bounds(m + k, k, 48);
    let second = Bounds::new(second.lo.mul_u64(k), second.hi.mul_u64(k));
    Ok((first, second))
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkerRow {
    pub m: u64,
    pub k: u64,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub closed_form: DyadicRational,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub brute_force: DyadicRational,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    pub bound1: DyadicRational,
    #[serde(serialize_with = "crate::report::ser_bounds")]
    pub bound2: Bounds,
}

impl MarkerRow {
    /// closed = brute, and closed >= bound1 >= bound2 (the last certified
    /// against the upper end of its enclosure).
    pub fn holds(&self) -> bool {
        self.closed_form == self.brute_force
            && self.closed_form >= self.bound1
            && self.bound1 >= self.bound2.hi
    }
}

/// Every `1 <= k <= m <= m_max`.
pub fn marker_table(m_max: u64) -> Result<Vec<MarkerRow>, SeriesError> {
    let mut rows = Vec::new();
    for m in 1..=m_max {
        for k in 1..=m {
            let (bound1, bound2) = marker_lower_bounds(m, k)?;
            rows.push(MarkerRow {
                m,
                k,
                closed_form: min_marker_sum(m, k)?,
                brute_force: brute_force_min(m, k)?,
                bound1,
                bound2,
            });
        }
    }
    Ok(rows)
}
