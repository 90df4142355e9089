//! Martingales stored extensionally up to a depth bound, and the
//! bet-everything martingale of a prediction rule.

use std::collections::BTreeMap;

use super::RandomnessError;
use crate::bitreal::{BitPrefix, DyadicRational};

/// Largest depth a [`Martingale`] may be built to (`2^(d+1) - 1` nodes).
pub const MAX_DEPTH: usize = 22;

/// A partial map from finite prefixes to a predicted next bit.
pub trait PredictionRule {
    fn predict(&self, prefix: &BitPrefix) -> Option<bool>;
}

/// A rule given by a closure.
pub struct RuleFn<F>(pub F);

impl<F: Fn(&BitPrefix) -> Option<bool>> PredictionRule for RuleFn<F> {
    fn predict(&self, prefix: &BitPrefix) -> Option<bool> {
        (self.0)(prefix)
    }
}

/// A rule defined on finitely many prefixes.
#[derive(Debug, Clone, Default)]
pub struct TableRule(pub BTreeMap<BitPrefix, bool>);

impl PredictionRule for TableRule {
    fn predict(&self, prefix: &BitPrefix) -> Option<bool> {
        self.0.get(prefix).copied()
    }
}

/// Capital `f(sigma)` for every `|sigma| <= depth`, in heap order: the node
/// of `sigma` is `2^|sigma| - 1 + sigma` read as a binary integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Martingale {
    depth: usize,
    values: Vec<DyadicRational>,
}

fn node(sigma: &BitPrefix) -> usize {
    sigma
        .bits()
        .iter()
        .fold(0usize, |i, &b| 2 * i + 1 + b as usize)
}

impl Martingale {
    /// Values in heap order; `values.len()` must be `2^(depth+1) - 1`.
    pub fn from_values(depth: usize, values: Vec<DyadicRational>) -> Option<Self> {
        (depth <= MAX_DEPTH && values.len() == (2usize << depth) - 1)
            .then_some(Martingale { depth, values })
    }

    /// Start with capital 1; where the rule predicts, stake everything on the
    /// predicted bit, elsewhere keep the capital on both sides.
    pub fn from_prediction_rule(p: &impl PredictionRule, depth: usize) -> Result<Self, RandomnessError> {
        if depth > MAX_DEPTH {
            return Err(RandomnessError::DepthExceeded {
                depth: MAX_DEPTH,
                len: depth,
            });
        }
        let n = (2usize << depth) - 1;
        let mut values = vec![DyadicRational::zero(); n];
        values[0] = DyadicRational::one();
        let mut level = vec![BitPrefix::empty()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * 2);
            for sigma in &level {
                let i = node(sigma);
                let v = values[i].clone();
                let (zero, one) = match p.predict(sigma) {
                    Some(false) => (v.mul_u64(2), DyadicRational::zero()),
                    Some(true) => (DyadicRational::zero(), v.mul_u64(2)),
                    None => (v.clone(), v),
                };
                values[2 * i + 1] = zero;
                values[2 * i + 2] = one;
                next.push(sigma.extended(false));
                next.push(sigma.extended(true));
            }
            level = next;
        }
        Ok(Martingale { depth, values })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn value(&self, sigma: &BitPrefix) -> Result<&DyadicRational, RandomnessError> {
        if sigma.len() > self.depth {
            return Err(RandomnessError::DepthExceeded {
                depth: self.depth,
                len: sigma.len(),
            });
        }
        Ok(&self.values[node(sigma)])
    }

    /// `(f(x|1), ..., f(x|n))`.
    pub fn capital_along(&self, x: &BitPrefix) -> Result<Vec<DyadicRational>, RandomnessError> {
        if x.len() > self.depth {
            return Err(RandomnessError::DepthExceeded {
                depth: self.depth,
                len: x.len(),
            });
        }
        let mut i = 0;
        Ok(x.bits()
            .iter()
            .map(|&b| {
                i = 2 * i + 1 + b as usize;
                self.values[i].clone()
            })
            .collect())
    }

    /// First internal node (heap order) where `f(s0) + f(s1) != 2 f(s)`.
    pub fn first_unfair_node(&self) -> Option<usize> {
        let internal = (1usize << self.depth) - 1;
        (0..internal).find(|&i| {
            &self.values[2 * i + 1] + &self.values[2 * i + 2] != self.values[i].mul_u64(2)
        })
    }

    pub fn is_fair(&self) -> bool {
        self.first_unfair_node().is_none()
    }

    /// `sum_{|sigma| = n} f(sigma) 2^-n`.
    pub fn level_average(&self, n: usize) -> Result<DyadicRational, RandomnessError> {
        if n > self.depth {
            return Err(RandomnessError::DepthExceeded {
                depth: self.depth,
                len: n,
            });
        }
        let start = (1usize << n) - 1;
        let total: DyadicRational = self.values[start..2 * start + 1].iter().cloned().sum();
        Ok(total.shr(n as u64))
    }

    /// Expected capital equals the initial capital at every level.
    pub fn conserves_capital(&self) -> bool {
        (0..=self.depth).all(|n| self.level_average(n).as_ref() == Ok(&self.values[0]))
    }
}
