use serde::Serialize;

use crate::bitreal::{BitPrefix, DyadicRational};

/// An indexed finite list of strings with exact weight `sum 2^-|sigma_i|`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolovayTest {
    members: Vec<(u64, String)>,
    #[serde(skip)]
    strings: Vec<BitPrefix>,
}

impl SolovayTest {
    pub fn new() -> Self {
        SolovayTest::default()
    }

    /// Enumerate `sigma` under index `index`.
    pub fn push(&mut self, index: u64, sigma: BitPrefix) {
        self.members.push((index, sigma.to_string()));
        self.strings.push(sigma);
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    /// `(index, sigma)` in enumeration order.
    pub fn members(&self) -> impl Iterator<Item = (u64, &BitPrefix)> {
        self.members.iter().map(|m| m.0).zip(self.strings.iter())
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.strings.iter().map(BitPrefix::len).collect()
    }

    pub fn weight(&self) -> DyadicRational {
        self.strings
            .iter()
            .map(|s| DyadicRational::pow2_neg(s.len() as u64))
            .sum()
    }

    /// Members that are initial segments of `x`.
    pub fn hits(&self, x: &BitPrefix) -> usize {
        self.strings.iter().filter(|s| s.is_prefix_of(x)).count()
    }
}
