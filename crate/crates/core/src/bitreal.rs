//! Exact dyadic arithmetic and 1-indexed binary prefixes of reals in `[0, 1]`.
//!
//! Every approximation in this crate is a number of the form `a / 2^k`, so the
//! only numeric type needed for exact work is [`DyadicRational`]. A
//! [`BitPrefix`] is a finite binary string whose first character is bit 1 of
//! the expansion.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitrealError {
    #[error("carry out of range")]
    CarryOutOfRange,
    #[error("position {pos} out of range 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("value {0} is not in [0, 1)")]
    NotInUnitInterval(String),
    #[error("subtraction would be negative")]
    NegativeResult,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// A nonnegative number `numerator / 2^scale`.
///
/// Values are kept canonical: the numerator is odd, or zero with scale zero.
/// Equality and hashing therefore agree with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigUint,
    scale: u64,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigUint>, scale: u64) -> Self {
        let mut d = DyadicRational {
            numerator: numerator.into(),
            scale,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        DyadicRational {
            numerator: BigUint::zero(),
            scale: 0,
        }
    }

    pub fn one() -> Self {
        DyadicRational {
            numerator: BigUint::one(),
            scale: 0,
        }
    }

    pub fn from_integer(n: u64) -> Self {
        Self::new(n, 0)
    }

    /// `2^-exp`.
    pub fn pow2_neg(exp: u64) -> Self {
        DyadicRational {
            numerator: BigUint::one(),
            scale: exp,
        }
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.scale = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0).min(self.scale);
        if tz > 0 {
            self.numerator >>= tz;
            self.scale -= tz;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Numerator of this value written over `2^scale`. `scale` must be at
    /// least the canonical scale.
    pub fn numerator_at_scale(&self, scale: u64) -> BigUint {
        assert!(scale >= self.scale, "scale {scale} below canonical scale {}", self.scale);
        &self.numerator << (scale - self.scale)
    }

    /// `floor(self * 2^scale)`, for any target scale.
    pub fn floor_at_scale(&self, scale: u64) -> BigUint {
        if scale >= self.scale {
            &self.numerator << (scale - self.scale)
        } else {
            &self.numerator >> (self.scale - scale)
        }
    }

    /// `ceil(self * 2^scale)`.
    pub fn ceil_at_scale(&self, scale: u64) -> BigUint {
        if scale >= self.scale {
            &self.numerator << (scale - self.scale)
        } else {
            let shift = self.scale - scale;
            let q = &self.numerator >> shift;
            if (&q << shift) == self.numerator {
                q
            } else {
                q + 1u32
            }
        }
    }

    pub fn floor(&self) -> BigUint {
        self.floor_at_scale(0)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, BitrealError> {
        let scale = self.scale.max(other.scale);
        let a = self.numerator_at_scale(scale);
        let b = other.numerator_at_scale(scale);
        if a < b {
            return Err(BitrealError::NegativeResult);
        }
        Ok(Self::new(a - b, scale))
    }

    /// Multiply by `2^shift`.
    pub fn shl(&self, shift: u64) -> Self {
        if shift <= self.scale {
            Self::new(self.numerator.clone(), self.scale - shift)
        } else {
            Self::new(&self.numerator << (shift - self.scale), 0)
        }
    }

    /// Divide by `2^shift`.
    pub fn shr(&self, shift: u64) -> Self {
        Self::new(self.numerator.clone(), self.scale + shift)
    }

    pub fn mul_u64(&self, k: u64) -> Self {
        Self::new(&self.numerator * k, self.scale)
    }

    /// Nearest `f64`, for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits so huge scales do not overflow the exponent.
        let bits = self.numerator.bits();
        let (num, scale) = if bits > 64 {
            let drop = bits - 64;
            ((&self.numerator >> drop).to_f64().unwrap_or(f64::INFINITY), self.scale as i64 - drop as i64)
        } else {
            (self.numerator.to_f64().unwrap_or(f64::INFINITY), self.scale as i64)
        };
        let mut x = num;
        let mut s = scale;
        while s > 1000 {
            x *= 2f64.powi(-1000);
            s -= 1000;
        }
        while s < -1000 {
            x *= 2f64.powi(1000);
            s += 1000;
        }
        x * 2f64.powi(-(s as i32))
    }

    pub fn to_big_rational(&self) -> num_rational::BigRational {
        use num_bigint::BigInt;
        num_rational::BigRational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::from(BigUint::one() << self.scale),
        )
    }

    pub fn is_below_one(&self) -> bool {
        self < &Self::one()
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.numerator_at_scale(scale)
            .cmp(&other.numerator_at_scale(scale))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact trichotomy.
pub fn compare(x: &DyadicRational, y: &DyadicRational) -> Ordering {
    x.cmp(y)
}

impl Add for &DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let scale = self.scale.max(rhs.scale);
        DyadicRational::new(
            self.numerator_at_scale(scale) + rhs.numerator_at_scale(scale),
            scale,
        )
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.numerator * &rhs.numerator, self.scale + rhs.scale)
    }
}

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |a, b| &a + &b)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.scale)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for DyadicRational {
    type Err = BitrealError;

    /// Accepts `num/2^scale`, `num/den` with `den` a power of two, or an
    /// integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || BitrealError::Parse(s.to_string());
        let s = s.trim();
        let Some((num, den)) = s.split_once('/') else {
            return Ok(Self::new(BigUint::from_str(s).map_err(|_| err())?, 0));
        };
        let num = BigUint::from_str(num.trim()).map_err(|_| err())?;
        let den = den.trim();
        if let Some(exp) = den.strip_prefix("2^") {
            let scale: u64 = exp.parse().map_err(|_| err())?;
            return Ok(Self::new(num, scale));
        }
        let den = BigUint::from_str(den).map_err(|_| err())?;
        if den.is_zero() || den.count_ones() != 1 {
            return Err(err());
        }
        Ok(Self::new(num, den.trailing_zeros().unwrap_or(0)))
    }
}

/// A finite binary string; as a prefix of a real, character `i` (1-based) is
/// bit `i` of the expansion.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitPrefix {
    bits: Vec<bool>,
}

impl BitPrefix {
    pub fn new(bits: Vec<bool>) -> Self {
        BitPrefix { bits }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitPrefix { bits: vec![false; len] }
    }

    pub fn ones(len: usize) -> Self {
        BitPrefix { bits: vec![true; len] }
    }

    /// Bits 1..=len taken from `word`, bit 1 being the least significant bit
    /// of `word`. Used by the exhaustive enumerators.
    pub fn from_mask(word: u64, len: usize) -> Self {
        BitPrefix {
            bits: (0..len).map(|i| (word >> i) & 1 == 1).collect(),
        }
    }

    /// Inverse of [`BitPrefix::from_mask`].
    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64);
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit_at(&self, n: usize) -> Result<bool, BitrealError> {
        if n == 0 || n > self.len() {
            return Err(BitrealError::PositionOutOfRange {
                pos: n,
                len: self.len(),
            });
        }
        Ok(self.bits[n - 1])
    }

    /// The first `n` bits.
    pub fn truncate(&self, n: usize) -> BitPrefix {
        BitPrefix {
            bits: self.bits[..n.min(self.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &BitPrefix) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extended(&self, bit: bool) -> BitPrefix {
        let mut p = self.clone();
        p.push(bit);
        p
    }

    /// `sum bits(n) 2^-n`.
    pub fn value(&self) -> DyadicRational {
        DyadicRational::new(self.to_biguint(), self.len() as u64)
    }

    /// The bits read as a big-endian integer (bit 1 most significant).
    pub fn to_biguint(&self) -> BigUint {
        let mut n = BigUint::zero();
        for &b in &self.bits {
            n <<= 1u32;
            if b {
                n += 1u32;
            }
        }
        n
    }

    /// The low `len` bits of `n`, bit 1 being the most significant.
    pub fn from_biguint(n: &BigUint, len: usize) -> BitPrefix {
        BitPrefix {
            bits: (0..len)
                .map(|i| n.bit((len - 1 - i) as u64))
                .collect(),
        }
    }

    /// Add `2^-d` in place of the prefix, propagating the carry toward bit 1.
    pub fn add_pow2(&self, d: usize) -> Result<BitPrefix, BitrealError> {
        if d == 0 || d > self.len() {
            return Err(BitrealError::PositionOutOfRange {
                pos: d,
                len: self.len(),
            });
        }
        let mut bits = self.bits.clone();
        let mut pos = d;
        loop {
            if pos == 0 {
                return Err(BitrealError::CarryOutOfRange);
            }
            if bits[pos - 1] {
                bits[pos - 1] = false;
                pos -= 1;
            } else {
                bits[pos - 1] = true;
                break;
            }
        }
        Ok(BitPrefix { bits })
    }

    /// Number of ones.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Bit `n` (1-based) of the terminating binary expansion of `x`.
pub fn bit_of(x: &DyadicRational, n: usize) -> bool {
    // floor(x * 2^n) mod 2
    x.floor_at_scale(n as u64).is_odd()
}

/// First `n` bits of the terminating expansion of `x`, which must lie in
/// `[0, 1)`.
pub fn prefix_of(x: &DyadicRational, n: usize) -> Result<BitPrefix, BitrealError> {
    if !x.is_below_one() {
        return Err(BitrealError::NotInUnitInterval(x.to_string()));
    }
    Ok(BitPrefix::from_biguint(&x.floor_at_scale(n as u64), n))
}

impl fmt::Display for BitPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPrefix({self})")
    }
}

impl FromStr for BitPrefix {
    type Err = BitrealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BitrealError::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitPrefix::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> BitPrefix {
        s.parse().unwrap()
    }

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    #[test]
    fn add_pow2_examples() {
        assert_eq!(p("0111").add_pow2(4).unwrap(), p("1000"));
        assert_eq!(p("10110111").add_pow2(6).unwrap(), p("10111011"));
        assert_eq!(p("0000").add_pow2(1).unwrap(), p("1000"));
    }

    #[test]
    fn add_pow2_errors() {
        assert_eq!(p("1111").add_pow2(4), Err(BitrealError::CarryOutOfRange));
        assert!(matches!(
            p("0000").add_pow2(5),
            Err(BitrealError::PositionOutOfRange { .. })
        ));
        assert!(p("0000").add_pow2(0).is_err());
    }

    #[test]
    fn bit_at_examples() {
        let x = p("101");
        assert!(!x.bit_at(2).unwrap());
        assert!(x.bit_at(1).unwrap());
        assert!(x.bit_at(3).unwrap());
        assert!(x.bit_at(0).is_err());
        assert!(x.bit_at(4).is_err());
    }

    #[test]
    fn prefix_of_examples() {
        assert_eq!(prefix_of(&d("3/4"), 4).unwrap(), p("1100"));
        assert_eq!(prefix_of(&d("5/16"), 4).unwrap(), p("0101"));
        assert_eq!(prefix_of(&DyadicRational::zero(), 3).unwrap(), p("000"));
        assert!(prefix_of(&DyadicRational::one(), 3).is_err());
        // 1/3 has no dyadic form at all
        assert!("1/3".parse::<DyadicRational>().is_err());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&d("1/2"), &d("3/8")), Ordering::Greater);
        assert_eq!(compare(&d("1/2"), &d("2/4")), Ordering::Equal);
        assert_eq!(compare(&d("0"), &d("1/1024")), Ordering::Less);
    }

    #[test]
    fn canonical_form_and_text() {
        let x = d("12/2^5");
        assert_eq!(x.numerator(), &BigUint::from(3u32));
        assert_eq!(x.scale(), 3);
        assert_eq!(x.to_string(), "3/2^3");
        assert_eq!(d("0/2^9").to_string(), "0/2^0");
        assert_eq!(d("6/16"), d("3/2^3"));
    }

    #[test]
    fn checked_sub_rejects_negative() {
        assert_eq!(d("1/4").checked_sub(&d("1/2")), Err(BitrealError::NegativeResult));
        assert_eq!(d("3/4").checked_sub(&d("1/2")).unwrap(), d("1/4"));
    }

    #[test]
    fn ceil_floor_at_scale() {
        let x = d("5/2^4");
        assert_eq!(x.floor_at_scale(2), BigUint::from(1u32));
        assert_eq!(x.ceil_at_scale(2), BigUint::from(2u32));
        assert_eq!(x.ceil_at_scale(4), BigUint::from(5u32));
    }

    fn arb_unit_dyadic() -> impl Strategy<Value = DyadicRational> {
        (0u32..40).prop_flat_map(|scale| {
            (0u64..(1u64 << scale)).prop_map(move |n| DyadicRational::new(n, scale as u64))
        })
    }

    proptest! {
        #[test]
        fn prefix_brackets_value(x in arb_unit_dyadic(), n in 0usize..60) {
            let v = prefix_of(&x, n).unwrap().value();
            prop_assert!(v <= x);
            prop_assert!(x < &v + &DyadicRational::pow2_neg(n as u64));
        }

        #[test]
        fn prefix_is_stable(x in arb_unit_dyadic(), k in 1usize..40, extra in 0usize..20) {
            let short = prefix_of(&x, k).unwrap();
            let long = prefix_of(&x, k + extra).unwrap();
            prop_assert_eq!(short.bit_at(k).unwrap(), long.bit_at(k).unwrap());
            prop_assert_eq!(short.bit_at(k).unwrap(), bit_of(&x, k));
        }

        #[test]
        fn add_pow2_is_exact(bits in proptest::collection::vec(any::<bool>(), 1..48), dsel in any::<prop::sample::Index>()) {
            let x = BitPrefix::new(bits);
            let dpos = dsel.index(x.len()) + 1;
            let expected = &x.value() + &DyadicRational::pow2_neg(dpos as u64);
            match x.add_pow2(dpos) {
                Ok(y) => {
                    prop_assert_eq!(y.len(), x.len());
                    prop_assert_eq!(y.value(), expected);
                }
                Err(e) => {
                    prop_assert_eq!(e, BitrealError::CarryOutOfRange);
                    prop_assert!(expected >= DyadicRational::one());
                }
            }
        }

        #[test]
        fn text_round_trip(x in arb_unit_dyadic()) {
            prop_assert_eq!(x.to_string().parse::<DyadicRational>().unwrap(), x);
        }
    }
}
