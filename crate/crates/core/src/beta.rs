//! The diagonal real `beta = Omega + sum_{i>c} 2^-d_i`, `d_i = t_i +
//! floor(g(t_i)) + 1`, and the bit-prediction equivalence it carries.
//!
//! With `I_k = [t_k, d_k - 1]` and `J_k = [d_k + 1, t_(k+1) + floor(g(t_k)) + 1]`:
//! when `Omega` is all ones on `I_k` and has a zero in each relevant `J`,
//! `Omega(d_k) = 1` exactly when `beta(t_k) = 0`. A reduction of `beta` to
//! `Omega` with use `d_k - 1` at `t_k` would then predict `Omega(d_k)`.

use std::cell::Cell;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitreal::{BitPrefix, BitrealError, DyadicRational};
use crate::machine::LeftCEApproximation;
use crate::randomness::PredictionRule;
use crate::reduction::{reduce_with, ReductionError, UseBoundedOracle};
use crate::series::{PartitionSequence, RedundancyFunction, SeriesError};

/// Largest prefix length for [`exhaustive_equivalence`].
pub const EXHAUSTIVE_MAX_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BetaError {
    #[error(transparent)]
    Carry(#[from] BitrealError),
    #[error("prefix too short")]
    PrefixTooShort,
    #[error("cutoff below partition range")]
    CutoffBelowRange,
    #[error("interval for index {k} lies outside positions 1..={len}")]
    IntervalOutOfRange { k: usize, len: usize },
    #[error("index {0} has no successor term in the partition")]
    MissingSuccessor(usize),
    #[error("index {0} is not valid")]
    InvalidIndex(usize),
    #[error("bit {position} of beta is unresolved (index {k})")]
    Unresolved { k: usize, position: u64 },
    #[error("intervals overflow the prefix: no index above the cutoff fits in {0} bits")]
    NoIndexInRange(usize),
    #[error("exhaustive search limited to length <= 24, got {0}")]
    LengthCap(usize),
    #[error("reducer read past its use bound: {0}")]
    UseBound(ReductionError),
    #[error("reducer gave no answer for index {0}")]
    ReducerUndefined(usize),
    #[error(transparent)]
    Reduction(ReductionError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl From<ReductionError> for BetaError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::UseBoundExceeded { .. } => BetaError::UseBound(e),
            e => BetaError::Reduction(e),
        }
    }
}

/// Closed interval of positions.
pub type Span = (u64, u64);

/// Positions attached to index `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub k: usize,
    pub t: u64,
    pub floor_g: u64,
    pub d: u64,
    pub i: Span,
    /// Needs `t_(k+1)`.
    pub j: Option<Span>,
}

/// One [`Layout`] per listed index.
pub fn layout(t: &PartitionSequence, g: &RedundancyFunction) -> Result<Vec<Layout>, BetaError> {
    (1..=t.len())
        .map(|k| {
            let tk = t.t(k).expect("in range");
            let fg = g.floor_g(tk)?;
            Ok(Layout {
                k,
                t: tk,
                floor_g: fg,
                d: tk + fg + 1,
                i: (tk, tk + fg),
                j: t.t(k + 1).map(|next| (tk + fg + 2, next + fg + 1)),
            })
        })
        .collect()
}

fn fits(span: Span, len: usize) -> bool {
    span.0 >= 1 && span.1 <= len as u64
}

fn bits_in(x: &BitPrefix, span: Span) -> &[bool] {
    &x.bits()[span.0 as usize - 1..span.1 as usize]
}

fn layout_at(t: &PartitionSequence, g: &RedundancyFunction, k: usize) -> Result<Layout, BetaError> {
    let tk = t.t(k).ok_or(BetaError::InvalidIndex(k))?;
    let fg = g.floor_g(tk)?;
    Ok(Layout {
        k,
        t: tk,
        floor_g: fg,
        d: tk + fg + 1,
        i: (tk, tk + fg),
        j: t.t(k + 1).map(|next| (tk + fg + 2, next + fg + 1)),
    })
}

/// Every bit of `x` on `I_k` is 1.
pub fn property_a(
    x: &BitPrefix,
    k: usize,
    t: &PartitionSequence,
    g: &RedundancyFunction,
) -> Result<bool, BetaError> {
    let l = layout_at(t, g, k)?;
    if !fits(l.i, x.len()) {
        return Err(BetaError::IntervalOutOfRange { k, len: x.len() });
    }
    Ok(bits_in(x, l.i).iter().all(|&b| b))
}

/// Some bit of `x` on `J_k` is 0.
pub fn property_b(
    x: &BitPrefix,
    k: usize,
    t: &PartitionSequence,
    g: &RedundancyFunction,
) -> Result<bool, BetaError> {
    let l = layout_at(t, g, k)?;
    let j = l.j.ok_or(BetaError::MissingSuccessor(k))?;
    if !fits(j, x.len()) {
        return Err(BetaError::IntervalOutOfRange { k, len: x.len() });
    }
    Ok(bits_in(x, j).iter().any(|&b| !b))
}

/// `beta` built from an `Omega` prefix, with the bits the truncated tail
/// of the series could still change flagged unresolved.
///
/// The partition is taken to be exactly the listed terms; terms with
/// `d_i` past the prefix form the tail, bounded by `2^(1 - D)` for the
/// least such `D`.
#[derive(Debug, Clone)]
pub struct BetaInstance {
    omega: BitPrefix,
    t: PartitionSequence,
    g: RedundancyFunction,
    c: usize,
    layout: Vec<Layout>,
    terms: Vec<usize>,
    beta: BitPrefix,
    resolved: Vec<bool>,
}

pub fn build_beta(
    omega: &BitPrefix,
    t: &PartitionSequence,
    g: &RedundancyFunction,
    c: usize,
) -> Result<BetaInstance, BetaError> {
    let len = omega.len();
    match t.t(c + 1) {
        Some(0) => return Err(BetaError::CutoffBelowRange),
        None => return Err(BetaError::PrefixTooShort),
        Some(_) => {}
    }
    let layout = layout(t, g)?;
    let terms: Vec<usize> = layout[c..]
        .iter()
        .filter(|l| l.d <= len as u64)
        .map(|l| l.k)
        .collect();
    if terms.is_empty() {
        return Err(BetaError::PrefixTooShort);
    }
    let mut beta = omega.clone();
    for &k in &terms {
        beta = beta.add_pow2(layout[k - 1].d as usize)?;
    }
    let tail = layout[c..]
        .iter()
        .map(|l| l.d)
        .filter(|&d| d > len as u64)
        .min()
        .map_or_else(DyadicRational::zero, |d| DyadicRational::pow2_neg(d - 1));
    let lo = beta.value();
    let hi = &lo + &tail;
    let resolved: Vec<bool> = (1..=len as u64)
        .map(|p| lo.floor_at_scale(p) == hi.floor_at_scale(p))
        .collect();
    if !resolved.iter().any(|&r| r) {
        return Err(BetaError::PrefixTooShort);
    }
    Ok(BetaInstance {
        omega: omega.clone(),
        t: t.clone(),
        g: g.clone(),
        c,
        layout,
        terms,
        beta,
        resolved,
    })
}

/// Outcome of [`check_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    /// `k > c` and `Omega` is all ones on `I_k`.
    pub valid: bool,
    /// `(b)_(k-1)` and every `(b)_k'`, `k' >= k`, whose `J` fits the prefix.
    pub conditions_hold: bool,
    /// `Omega(d_k) = 1 <=> beta(t_k) = 0`, when evaluated.
    pub equivalence_holds: Option<bool>,
}

impl BetaInstance {
    pub fn omega(&self) -> &BitPrefix {
        &self.omega
    }

    pub fn beta(&self) -> &BitPrefix {
        &self.beta
    }

    pub fn cutoff(&self) -> usize {
        self.c
    }

    pub fn partition(&self) -> &PartitionSequence {
        &self.t
    }

    pub fn redundancy(&self) -> &RedundancyFunction {
        &self.g
    }

    pub fn layout(&self) -> &[Layout] {
        &self.layout
    }

    /// Indices whose term `2^-d_k` was added.
    pub fn terms(&self) -> &[usize] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// 1-based.
    pub fn is_resolved(&self, p: u64) -> bool {
        p >= 1 && self.resolved.get(p as usize - 1).copied().unwrap_or(false)
    }

    /// Resolved bits as a `0`/`1` string aligned with `beta`.
    pub fn resolved_mask(&self) -> String {
        self.resolved.iter().map(|&r| if r { '1' } else { '0' }).collect()
    }

    fn entry(&self, k: usize) -> Result<&Layout, BetaError> {
        k.checked_sub(1)
            .and_then(|i| self.layout.get(i))
            .ok_or(BetaError::InvalidIndex(k))
    }

    /// `k > c` and `(a)_k` holds for `Omega`.
    pub fn is_valid(&self, k: usize) -> Result<bool, BetaError> {
        let l = self.entry(k)?;
        if !fits(l.i, self.len()) {
            return Err(BetaError::IntervalOutOfRange { k, len: self.len() });
        }
        Ok(k > self.c && bits_in(&self.omega, l.i).iter().all(|&b| b))
    }

    /// Indices above the cutoff whose `d_k` lies within the prefix.
    pub fn indices_in_range(&self) -> Vec<usize> {
        self.layout[self.c..]
            .iter()
            .filter(|l| l.d <= self.len() as u64)
            .map(|l| l.k)
            .collect()
    }

    fn b_conditions(&self, k: usize) -> bool {
        let len = self.len();
        let zero_in = |l: &Layout| {
            l.j.filter(|&j| fits(j, len))
                .is_none_or(|j| bits_in(&self.omega, j).iter().any(|&b| !b))
        };
        let before = k < 2 || zero_in(&self.layout[k - 2]);
        before && self.layout[k - 1..].iter().all(zero_in)
    }

    pub fn check_equivalence(&self, k: usize) -> Result<Verdict, BetaError> {
        let l = self.entry(k)?;
        if l.d > self.len() as u64 {
            return Err(BetaError::IntervalOutOfRange { k, len: self.len() });
        }
        if !self.is_valid(k)? {
            return Ok(Verdict {
                valid: false,
                conditions_hold: false,
                equivalence_holds: None,
            });
        }
        if !self.b_conditions(k) {
            return Ok(Verdict {
                valid: true,
                conditions_hold: false,
                equivalence_holds: None,
            });
        }
        if !self.is_resolved(l.t) {
            return Err(BetaError::Unresolved { k, position: l.t });
        }
        let omega_d = self.omega.bits()[l.d as usize - 1];
        let beta_t = self.beta.bits()[l.t as usize - 1];
        Ok(Verdict {
            valid: true,
            conditions_hold: true,
            equivalence_holds: Some(omega_d == !beta_t),
        })
    }

    pub fn report(&self) -> BetaReport {
        BetaReport {
            omega: self.omega.to_string(),
            beta: self.beta.to_string(),
            resolved: self.resolved_mask(),
            t: self.t.positions().to_vec(),
            g: self.g.name(),
            c: self.c,
            terms: self.terms.clone(),
            layout: self.layout.clone(),
        }
    }
}

/// JSON form of a [`BetaInstance`].
#[derive(Debug, Clone, Serialize)]
pub struct BetaReport {
    pub omega: String,
    pub beta: String,
    pub resolved: String,
    pub t: Vec<u64>,
    pub g: String,
    pub c: usize,
    pub terms: Vec<usize>,
    pub layout: Vec<Layout>,
}

/// Least cutoff `c` (at least one below the partition range) such that
/// `Omega` satisfies `(b)_k` and `t_k + g(t_k) < t_(k+1)` for every `k >= c`
/// whose `J_k` fits the prefix.
pub fn choose_cutoff(
    omega: &BitPrefix,
    t: &PartitionSequence,
    g: &RedundancyFunction,
) -> Result<usize, BetaError> {
    let start = t.first_positive_index().ok_or(BetaError::CutoffBelowRange)?;
    let len = omega.len();
    let last_bad = layout(t, g)?
        .iter()
        .filter(|l| match l.j {
            Some(j) if fits(j, len) => {
                let next = t.t(l.k + 1).expect("has J");
                bits_in(omega, j).iter().all(|&b| b) || l.t + l.floor_g >= next
            }
            _ => false,
        })
        .map(|l| l.k)
        .max();
    Ok(last_bad.map_or(start - 1, |k| (k + 1).max(start - 1)))
}

/// Lowest lexicographic failing prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub omega: String,
    pub k: usize,
}

/// Tallies of [`exhaustive_equivalence`]; pair counts are over
/// `(prefix, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExhaustiveReport {
    pub length: usize,
    pub cutoff: usize,
    pub indices: Vec<usize>,
    pub prefixes: u64,
    /// Prefixes with at least one checked index.
    pub qualifying: u64,
    pub checked: u64,
    /// `(a)_k` fails.
    pub invalid: u64,
    /// Valid but some required `(b)` fails.
    pub skipped: u64,
    /// `beta(t_k)` not determined by the prefix.
    pub unresolved: u64,
    /// Prefixes for which `beta >= 1`.
    pub overflow: u64,
    pub counterexamples: u64,
    pub first_counterexample: Option<Counterexample>,
}

impl ExhaustiveReport {
    pub fn qualifying_fraction(&self) -> f64 {
        self.qualifying as f64 / self.prefixes as f64
    }
}

#[derive(Default)]
struct Tally {
    qualifying: u64,
    checked: u64,
    invalid: u64,
    skipped: u64,
    unresolved: u64,
    overflow: u64,
    counterexamples: u64,
    first: Option<(u64, usize)>,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.qualifying += o.qualifying;
        self.checked += o.checked;
        self.invalid += o.invalid;
        self.skipped += o.skipped;
        self.unresolved += o.unresolved;
        self.overflow += o.overflow;
        self.counterexamples += o.counterexamples;
        self.first = match (self.first, o.first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Check the equivalence on every one of the `2^L` prefixes.
///
/// Prefixes are integers with bit 1 most significant, so numeric order is
/// lexicographic order. Sums are done in integers scaled by `2^L`.
pub fn exhaustive_equivalence(
    t: &PartitionSequence,
    g: &RedundancyFunction,
    c: usize,
    len: usize,
) -> Result<ExhaustiveReport, BetaError> {
    if len == 0 || len > EXHAUSTIVE_MAX_LEN {
        return Err(BetaError::LengthCap(len));
    }
    if t.t(c + 1) == Some(0) {
        return Err(BetaError::CutoffBelowRange);
    }
    let lay = layout(t, g)?;
    let l64 = len as u64;
    let indices: Vec<usize> = lay.iter().skip(c).filter(|l| l.d <= l64).map(|l| l.k).collect();
    if indices.is_empty() {
        return Err(BetaError::NoIndexInRange(len));
    }
    let bit = |p: u64| 1u64 << (l64 - p);
    let span_mask = |(a, b): Span| (a..=b).fold(0u64, |m, p| m | bit(p));
    let added: u64 = indices.iter().map(|&k| bit(lay[k - 1].d)).sum();
    // the tail sum is below 2^(1-D); it can only reach the last bit if D = L+1
    let tail_units = lay[c..]
        .iter()
        .map(|l| l.d)
        .filter(|&d| d > l64)
        .min()
        .map_or(0, |d| u64::from(d == l64 + 1));
    // J masks for every index whose J fits
    let j_masks: Vec<Option<u64>> = lay
        .iter()
        .map(|l| l.j.filter(|&j| fits(j, len)).map(span_mask))
        .collect();
    struct Check {
        k: usize,
        i_mask: u64,
        d_bit: u64,
        t_shift: u64,
        required_j: Vec<u64>,
    }
    let checks: Vec<Check> = indices
        .iter()
        .map(|&k| {
            let l = &lay[k - 1];
            let mut required_j: Vec<u64> = j_masks[k - 1..].iter().flatten().copied().collect();
            if k >= 2 {
                required_j.extend(j_masks[k - 2]);
            }
            Check {
                k,
                i_mask: span_mask(l.i),
                d_bit: bit(l.d),
                t_shift: l64 - l.t,
                required_j,
            }
        })
        .collect();
    let full = 1u64 << len;
    let tally = (0..full)
        .into_par_iter()
        .fold(Tally::default, |mut acc, x| {
            let b = x + added;
            if b >= full {
                acc.overflow += 1;
                return acc;
            }
            let mut qualifies = false;
            for ch in &checks {
                if x & ch.i_mask != ch.i_mask {
                    acc.invalid += 1;
                    continue;
                }
                if ch.required_j.iter().any(|&m| m & !x == 0) {
                    acc.skipped += 1;
                    continue;
                }
                if b >> ch.t_shift != (b + tail_units) >> ch.t_shift {
                    acc.unresolved += 1;
                    continue;
                }
                acc.checked += 1;
                qualifies = true;
                let omega_d = x & ch.d_bit != 0;
                let beta_t = (b >> ch.t_shift) & 1 == 1;
                if omega_d == beta_t {
                    acc.counterexamples += 1;
                    if acc.first.is_none_or(|(y, _)| x < y) {
                        acc.first = Some((x, ch.k));
                    }
                }
            }
            acc.qualifying += qualifies as u64;
            acc
        })
        .reduce(Tally::default, Tally::merge);
    Ok(ExhaustiveReport {
        length: len,
        cutoff: c,
        indices,
        prefixes: full,
        qualifying: tally.qualifying,
        checked: tally.checked,
        invalid: tally.invalid,
        skipped: tally.skipped,
        unresolved: tally.unresolved,
        overflow: tally.overflow,
        counterexamples: tally.counterexamples,
        first_counterexample: tally.first.map(|(x, k)| Counterexample {
            omega: BitPrefix::from_biguint(&x.into(), len).to_string(),
            k,
        }),
    })
}

/// A procedure that claims to compute bits of `beta` from an `Omega`
/// oracle whose use bound is fixed by the caller.
pub trait Reducer {
    /// `Ok(None)` when the procedure gives no answer.
    fn beta_bit(&self, oracle: &UseBoundedOracle, n: u64) -> Result<Option<bool>, ReductionError>;
}

/// Answers with the true bits of a known instance, and only for oracles
/// that are prefixes of its `Omega`.
pub struct TrueBitsReducer<'a> {
    pub instance: &'a BetaInstance,
}

impl Reducer for TrueBitsReducer<'_> {
    fn beta_bit(&self, oracle: &UseBoundedOracle, n: u64) -> Result<Option<bool>, ReductionError> {
        let seen = oracle.read_prefix(oracle.bound())?;
        let inst = self.instance;
        if !seen.is_prefix_of(&inst.omega) || !inst.is_resolved(n) {
            return Ok(None);
        }
        Ok(Some(inst.beta.bits()[n as usize - 1]))
    }
}

/// The stage-matching reduction run on approximations of `beta` and
/// `Omega`.
pub struct ReductionReducer<'a> {
    pub beta: &'a LeftCEApproximation,
    pub omega: &'a LeftCEApproximation,
    pub max_stage: u64,
}

impl Reducer for ReductionReducer<'_> {
    fn beta_bit(&self, oracle: &UseBoundedOracle, n: u64) -> Result<Option<bool>, ReductionError> {
        let trace = reduce_with(oracle, self.beta, self.omega, n, self.max_stage)?;
        Ok(trace.settled.then_some(trace.answer))
    }
}

/// Predict `Omega(d_k)` from `Omega | (d_k - 1)` for a valid `k`: ask the
/// reducer for `beta(t_k)` and predict 1 exactly when it is 0.
pub fn derived_predictor(
    inst: &BetaInstance,
    reducer: &impl Reducer,
    k: usize,
) -> Result<bool, BetaError> {
    if !inst.is_valid(k)? {
        return Err(BetaError::InvalidIndex(k));
    }
    let l = inst.entry(k)?;
    let use_bound = inst.g.floor_eval(l.t)?;
    debug_assert_eq!(use_bound + 1, l.d);
    let oracle = UseBoundedOracle::new(&inst.omega, use_bound as usize)?;
    let b = reducer
        .beta_bit(&oracle, l.t)?
        .ok_or(BetaError::ReducerUndefined(k))?;
    Ok(!b)
}

/// The derived predictor as a prediction rule on arbitrary prefixes: defined
/// on `sigma` of length `d_k - 1` (`k > c`) with `sigma` all ones on `I_k`
/// and an answer from the reducer.
pub struct PredictorRule<'a, R> {
    layout: &'a [Layout],
    cutoff: usize,
    g: &'a RedundancyFunction,
    reducer: R,
    violations: Cell<u64>,
}

impl<'a, R: Reducer> PredictorRule<'a, R> {
    pub fn new(inst: &'a BetaInstance, reducer: R) -> Self {
        PredictorRule {
            layout: &inst.layout,
            cutoff: inst.c,
            g: &inst.g,
            reducer,
            violations: Cell::new(0),
        }
    }

    /// Reads past the use bound seen so far.
    pub fn violations(&self) -> u64 {
        self.violations.get()
    }
}

impl<R: Reducer> PredictionRule for PredictorRule<'_, R> {
    fn predict(&self, sigma: &BitPrefix) -> Option<bool> {
        let l = self.layout[self.cutoff..]
            .iter()
            .find(|l| l.d == sigma.len() as u64 + 1)?;
        if !fits(l.i, sigma.len()) || !bits_in(sigma, l.i).iter().all(|&b| b) {
            return None;
        }
        let bound = self.g.floor_eval(l.t).ok()? as usize;
        let oracle = UseBoundedOracle::new(sigma, bound).ok()?;
        match self.reducer.beta_bit(&oracle, l.t) {
            Ok(answer) => answer.map(|b| !b),
            Err(_) => {
                self.violations.set(self.violations.get() + 1);
                None
            }
        }
    }
}

/// Stage `s` value `Omega_s + sum_{c < i <= c + s} 2^-d_i` over the listed
/// terms: a nondecreasing approximation of `beta` from one of `Omega`.
pub fn beta_approximation(
    omega: &LeftCEApproximation,
    t: &PartitionSequence,
    g: &RedundancyFunction,
    c: usize,
    stages: u64,
) -> Result<LeftCEApproximation, BetaError> {
    let lay = layout(t, g)?;
    let mut added = DyadicRational::zero();
    let mut values = Vec::with_capacity(stages as usize + 1);
    for s in 0..=stages {
        if s >= 1 {
            if let Some(l) = lay.get(c + s as usize - 1) {
                added = &added + &DyadicRational::pow2_neg(l.d);
            }
        }
        values.push(omega.stage_value(s) + &added);
    }
    Ok(LeftCEApproximation::from_values(values).expect("sums of nondecreasing sequences"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::Martingale;
    use crate::series::lemma33_partition;
    use proptest::prelude::*;

    fn bp(s: &str) -> BitPrefix {
        s.parse().unwrap()
    }

    fn zero_g() -> RedundancyFunction {
        RedundancyFunction::table(vec![DyadicRational::zero()]).unwrap()
    }

    fn one_g() -> RedundancyFunction {
        RedundancyFunction::table(vec![DyadicRational::one()]).unwrap()
    }

    fn user(t: &[u64]) -> PartitionSequence {
        PartitionSequence::user(t.to_vec()).unwrap()
    }

    #[test]
    fn build_examples() {
        let inst = build_beta(&bp("10110111"), &user(&[5]), &zero_g(), 0).unwrap();
        assert_eq!(inst.beta().to_string(), "10111011");
        assert_eq!(inst.resolved_mask(), "11111111");

        let inst = build_beta(&BitPrefix::zeros(10), &user(&[3, 7]), &zero_g(), 0).unwrap();
        assert_eq!(inst.beta().to_string(), "0001000100");

        assert_eq!(
            build_beta(&BitPrefix::ones(8), &user(&[7]), &zero_g(), 0).unwrap_err(),
            BetaError::Carry(BitrealError::CarryOutOfRange)
        );
    }

    #[test]
    fn build_guards() {
        let t = lemma33_partition(8).unwrap();
        let log = RedundancyFunction::log();
        assert_eq!(
            build_beta(&BitPrefix::zeros(16), &t, &log, 0).unwrap_err(),
            BetaError::CutoffBelowRange
        );
        assert_eq!(
            build_beta(&BitPrefix::zeros(4), &t, &log, 3).unwrap_err(),
            BetaError::PrefixTooShort
        );
        assert_eq!(
            build_beta(&BitPrefix::zeros(4), &user(&[1]), &log, 1).unwrap_err(),
            BetaError::PrefixTooShort
        );
    }

    #[test]
    fn tail_at_the_last_bit_unresolves_trailing_ones() {
        // d = 3 added, next d = 5 = L + 1: beta in [B, B + 2^-4]
        let inst = build_beta(&bp("0001"), &user(&[2, 4]), &zero_g(), 0).unwrap();
        assert_eq!(inst.beta().to_string(), "0011");
        assert_eq!(inst.resolved_mask(), "1000");
    }

    #[test]
    fn property_examples() {
        let t = user(&[2, 6]);
        let x = bp("0111000");
        assert!(property_a(&x, 1, &t, &one_g()).unwrap());
        // J_1 = [5, 8]
        assert!(!property_b(&BitPrefix::ones(8), 1, &t, &one_g()).unwrap());
        assert!(property_b(&bp("11111011"), 1, &t, &one_g()).unwrap());
        assert!(property_b(&x, 1, &t, &one_g()).is_err());
        assert!(property_b(&x, 2, &t, &one_g()).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let t = user(&[2]);
        let inst = build_beta(&bp("0110"), &t, &one_g(), 0).unwrap();
        assert_eq!(inst.beta().to_string(), "0111");
        let v = inst.check_equivalence(1).unwrap();
        assert!(v.valid && v.conditions_hold);
        assert_eq!(v.equivalence_holds, Some(true));

        let inst = build_beta(&bp("0111"), &t, &one_g(), 0).unwrap();
        assert_eq!(inst.beta().to_string(), "1000");
        assert_eq!(inst.check_equivalence(1).unwrap().equivalence_holds, Some(true));

        let inst = build_beta(&bp("0010"), &t, &one_g(), 0).unwrap();
        let v = inst.check_equivalence(1).unwrap();
        assert!(!v.valid);
        assert_eq!(v.equivalence_holds, None);
    }

    #[test]
    fn predictor_examples() {
        let t = user(&[2]);
        for omega in ["0110", "0111"] {
            let inst = build_beta(&bp(omega), &t, &one_g(), 0).unwrap();
            let p = derived_predictor(&inst, &TrueBitsReducer { instance: &inst }, 1).unwrap();
            assert_eq!(p, inst.omega().bits()[3]);
        }
        let inst = build_beta(&bp("0010"), &t, &one_g(), 0).unwrap();
        assert_eq!(
            derived_predictor(&inst, &TrueBitsReducer { instance: &inst }, 1).unwrap_err(),
            BetaError::InvalidIndex(1)
        );
    }

    struct Greedy;

    impl Reducer for Greedy {
        fn beta_bit(&self, oracle: &UseBoundedOracle, _n: u64) -> Result<Option<bool>, ReductionError> {
            oracle.read(oracle.bound() + 1).map(Some)
        }
    }

    #[test]
    fn reading_past_the_use_bound_is_fatal() {
        let inst = build_beta(&bp("0111"), &user(&[2]), &one_g(), 0).unwrap();
        assert!(matches!(
            derived_predictor(&inst, &Greedy, 1),
            Err(BetaError::UseBound(_))
        ));
    }

    #[test]
    fn lemma33_layout_at_16() {
        let t = lemma33_partition(8).unwrap();
        let lay = layout(&t, &RedundancyFunction::log()).unwrap();
        let rows: Vec<(u64, u64, Span, Option<Span>)> =
            lay[1..5].iter().map(|l| (l.t, l.d, l.i, l.j)).collect();
        assert_eq!(
            rows,
            vec![
                (1, 2, (1, 1), Some((3, 4))),
                (3, 5, (3, 4), Some((6, 9))),
                (7, 10, (7, 9), Some((11, 15))),
                (12, 16, (12, 15), Some((17, 21))),
            ]
        );
    }

    #[test]
    fn exhaustive_small() {
        let t = lemma33_partition(10).unwrap();
        let log = RedundancyFunction::log();
        let r = exhaustive_equivalence(&t, &log, 1, 12).unwrap();
        assert_eq!(r.counterexamples, 0);
        assert_eq!(r.indices, vec![2, 3, 4]);
        assert!(r.qualifying > 0);
        assert!(r.skipped > 0);
        assert_eq!(
            exhaustive_equivalence(&t, &log, 3, 8).unwrap_err(),
            BetaError::NoIndexInRange(8)
        );
        assert!(exhaustive_equivalence(&t, &log, 1, 25).is_err());
    }

    #[test]
    fn exhaustive_agrees_with_instances() {
        // every prefix of length 10, through the BigUint path
        let t = lemma33_partition(10).unwrap();
        let log = RedundancyFunction::log();
        let r = exhaustive_equivalence(&t, &log, 1, 10).unwrap();
        let (mut checked, mut overflow, mut qualifying) = (0, 0, 0);
        for x in 0u64..1 << 10 {
            let omega = BitPrefix::from_biguint(&x.into(), 10);
            let inst = match build_beta(&omega, &t, &log, 1) {
                Ok(i) => i,
                Err(BetaError::Carry(_)) => {
                    overflow += 1;
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let mut any = false;
            for k in inst.indices_in_range() {
                if let Ok(Verdict {
                    equivalence_holds: Some(h),
                    ..
                }) = inst.check_equivalence(k)
                {
                    assert!(h);
                    checked += 1;
                    any = true;
                }
            }
            qualifying += any as u64;
        }
        assert_eq!((r.checked, r.overflow, r.qualifying), (checked, overflow, qualifying));
    }

    #[test]
    fn cutoff_skips_failing_b() {
        let t = lemma33_partition(10).unwrap();
        let log = RedundancyFunction::log();
        // J_1 = [2,2], J_2 = [3,4], J_3 = [6,9], J_4 = [11,15]
        assert_eq!(choose_cutoff(&bp("1000000000000000"), &t, &log).unwrap(), 1);
        assert_eq!(choose_cutoff(&bp("1100000000000000"), &t, &log).unwrap(), 2);
        assert_eq!(choose_cutoff(&bp("1011000000000000"), &t, &log).unwrap(), 3);
        assert_eq!(choose_cutoff(&bp("1000011110111110"), &t, &log).unwrap(), 5);
    }

    #[test]
    fn predictor_martingale_doubles_at_valid_indices() {
        let t = lemma33_partition(10).unwrap();
        let log = RedundancyFunction::log();
        // a = 1 on I_4 = [7, 9], zeros at 6 and 11, so k = 4 is valid
        let omega = bp("0100001110011010");
        let c = choose_cutoff(&omega, &t, &log).unwrap();
        let inst = build_beta(&omega, &t, &log, c).unwrap();
        let rule = PredictorRule::new(&inst, TrueBitsReducer { instance: &inst });
        let f = Martingale::from_prediction_rule(&rule, 16).unwrap();
        assert!(f.is_fair());
        let caps = f.capital_along(&omega).unwrap();
        assert!(inst.is_valid(4).unwrap());
        assert_eq!(caps[9], caps[8].mul_u64(2));
        assert_eq!(rule.violations(), 0);
    }

    #[test]
    fn approximation_is_monotone_with_the_right_limit() {
        let omega = LeftCEApproximation::from_values(vec![
            DyadicRational::zero(),
            "1/8".parse().unwrap(),
            "3/8".parse().unwrap(),
        ])
        .unwrap();
        let t = lemma33_partition(6).unwrap();
        let log = RedundancyFunction::log();
        let b = beta_approximation(&omega, &t, &log, 1, 10).unwrap();
        let expect = &"3/8".parse::<DyadicRational>().unwrap()
            + &[2u64, 5, 10, 16, 22]
                .iter()
                .map(|&d| DyadicRational::pow2_neg(d))
                .sum::<DyadicRational>();
        assert_eq!(*b.limit(), expect);
    }

    #[test]
    fn reduction_reducer_answers_along_the_approximations() {
        let omega_bits = bp("0100001110011010");
        let omega = LeftCEApproximation::constant(omega_bits.value());
        let t = lemma33_partition(10).unwrap();
        let log = RedundancyFunction::log();
        let inst = build_beta(&omega_bits, &t, &log, 1).unwrap();
        let beta = beta_approximation(&omega, &t, &log, 1, 20).unwrap();
        let r = ReductionReducer {
            beta: &beta,
            omega: &omega,
            max_stage: 20,
        };
        // Omega never moves, so the reduction answers from stage 0, where no
        // term has been added yet: beta_0 = Omega.
        let p = derived_predictor(&inst, &r, 4).unwrap();
        assert_eq!(p, !omega_bits.bits()[6]);
    }

    proptest! {
        #[test]
        fn beta_value_is_exact(x in any::<u16>(), c in 1usize..4) {
            let t = lemma33_partition(10).unwrap();
            let log = RedundancyFunction::log();
            let omega = BitPrefix::from_biguint(&x.into(), 16);
            if let Ok(inst) = build_beta(&omega, &t, &log, c) {
                let sum = inst
                    .terms()
                    .iter()
                    .map(|&k| DyadicRational::pow2_neg(inst.layout()[k - 1].d))
                    .fold(omega.value(), |a, b| &a + &b);
                prop_assert_eq!(inst.beta().value(), sum);
            }
        }
    }
}
