//! Rigorous enclosures with dyadic endpoints, and base-2 logarithms evaluated
//! to any number of fractional bits.
//!
//! `log2` uses the square-and-compare digit recurrence: for `y` in `[1, 2)`,
//! squaring `y` and halving when the square reaches 2 produces the next binary
//! digit of `log2 y`. Rounding `y` down (or up) on a fixed grid after every
//! step keeps the numbers small and yields a lower (or upper) bound, since
//! the recurrence is monotone in `y`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bitreal::DyadicRational;

/// Guard bits carried on the squaring grid beyond the requested precision.
const GUARD_BITS: u32 = 8;

/// A closed interval `[lo, hi]` of nonnegative dyadic rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Bounds {
    pub lo: DyadicRational,
    pub hi: DyadicRational,
}

impl Bounds {
    pub fn new(lo: DyadicRational, hi: DyadicRational) -> Self {
        debug_assert!(lo <= hi, "empty interval {lo} > {hi}");
        Bounds { lo, hi }
    }

    pub fn exact(x: DyadicRational) -> Self {
        Bounds {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn integer(n: u64) -> Self {
        Self::exact(DyadicRational::from_integer(n))
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> DyadicRational {
        self.hi.checked_sub(&self.lo).expect("lo <= hi")
    }

    pub fn contains(&self, x: &DyadicRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, other: &Bounds) -> Bounds {
        Bounds::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn add_integer(&self, n: u64) -> Bounds {
        let n = DyadicRational::from_integer(n);
        Bounds::new(&self.lo + &n, &self.hi + &n)
    }

    /// Multiply by the rational `num/den`, rounding outward to `prec`
    /// fractional bits when the division is inexact.
    pub fn mul_ratio(&self, num: u64, den: u64, prec: u32) -> Bounds {
        assert!(den > 0);
        if den == 1 {
            return Bounds::new(self.lo.mul_u64(num), self.hi.mul_u64(num));
        }
        let scale = prec as u64;
        let lo = self.lo.floor_at_scale(scale) * num / den;
        let hi_num = self.hi.ceil_at_scale(scale) * num;
        let hi = (&hi_num + (den - 1)) / den;
        Bounds::new(DyadicRational::new(lo, scale), DyadicRational::new(hi, scale))
    }

    /// `Some(floor)` when the interval does not straddle an integer boundary.
    pub fn certified_floor(&self) -> Option<u64> {
        let a = self.lo.floor();
        let b = self.hi.floor();
        if a == b {
            a.to_u64()
        } else {
            None
        }
    }

    /// Midpoint-free decimal rendering for diagnostics.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }

    /// Endpoints rounded outward to `prec` fractional bits, so reports do not
    /// carry thousand-bit numerators.
    pub fn rounded_outward(&self, prec: u32) -> Bounds {
        let s = prec as u64;
        Bounds::new(
            DyadicRational::new(self.lo.floor_at_scale(s), s),
            DyadicRational::new(self.hi.ceil_at_scale(s), s),
        )
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

impl fmt::Debug for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.to_f64_pair();
        write!(f, "Bounds({a}..{b})")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Round {
    Down,
    Up,
}

/// Integer part `k = floor(log2 x)` and the grid value of `x / 2^k` in
/// `[1, 2]`, scaled by `2^grid`.
fn normalize(x: &DyadicRational, grid: u32, round: Round) -> (u64, BigUint) {
    let m = x.numerator();
    let bits = m.bits();
    let k = bits - 1 - x.scale();
    // x / 2^k = m / 2^(bits-1)
    let shift = grid as i64 - (bits as i64 - 1);
    let y = if shift >= 0 {
        m << shift as u64
    } else {
        let s = (-shift) as u64;
        let q = m >> s;
        if round == Round::Up && (&q << s) != *m {
            q + 1u32
        } else {
            q
        }
    };
    (k, y)
}

fn frac_digits_u128(mut y: u128, grid: u32, prec: u32, round: Round) -> u128 {
    let two = 1u128 << (grid + 1);
    let mask = (1u128 << grid) - 1;
    let mut digits = 0u128;
    for _ in 0..prec {
        let sq = y * y;
        y = sq >> grid;
        if round == Round::Up && sq & mask != 0 {
            y += 1;
        }
        digits <<= 1;
        if y >= two {
            digits |= 1;
            y = if round == Round::Up { (y + 1) >> 1 } else { y >> 1 };
        }
    }
    digits
}

fn frac_digits_big(mut y: BigUint, grid: u32, prec: u32, round: Round) -> BigUint {
    let two = BigUint::one() << (grid + 1);
    let mut digits = BigUint::zero();
    for _ in 0..prec {
        let sq = &y * &y;
        y = &sq >> grid;
        if round == Round::Up && (&y << grid) != sq {
            y += 1u32;
        }
        digits <<= 1u32;
        if y >= two {
            digits += 1u32;
            y = if round == Round::Up { (y + 1u32) >> 1u32 } else { y >> 1u32 };
        }
    }
    digits
}

fn log2_bound(x: &DyadicRational, prec: u32, round: Round) -> DyadicRational {
    assert!(x >= &DyadicRational::one(), "log2 bound needs x >= 1, got {x}");
    let grid = prec + GUARD_BITS;
    let (k, y) = normalize(x, grid, round);
    let frac = if grid <= 61 {
        BigUint::from(frac_digits_u128(y.to_u128().expect("fits"), grid, prec, round))
    } else {
        frac_digits_big(y, grid, prec, round)
    };
    // After `prec` digits the remaining tail lies in [0, 1) * 2^-prec.
    let frac = if round == Round::Up { frac + 1u32 } else { frac };
    let int = BigUint::from(k) << prec;
    DyadicRational::new(int + frac, prec as u64)
}

/// Is `x` an exact power of two (including `2^0`)?
fn exact_log2(x: &DyadicRational) -> Option<u64> {
    if x.numerator().is_one() && x.scale() == 0 {
        return Some(0);
    }
    // canonical form: power of two iff numerator is 1 (scale > 0 means x < 1)
    let m = x.numerator();
    if x.scale() == 0 && m.count_ones() == 1 {
        return Some(m.bits() - 1);
    }
    None
}

/// Enclosure of `log2 x` with `prec` fractional bits. Exact when `x` is an
/// exact power of two. `log2 0 = 0` by convention.
///
/// Requires `x.lo >= 1` unless `x` is exactly zero.
pub fn log2_bounds(x: &Bounds, prec: u32) -> Bounds {
    if x.is_exact() {
        if x.lo.is_zero() {
            return Bounds::integer(0);
        }
        if let Some(k) = exact_log2(&x.lo) {
            return Bounds::integer(k);
        }
    }
    Bounds::new(
        log2_bound(&x.lo, prec, Round::Down),
        log2_bound(&x.hi, prec, Round::Up),
    )
}

/// `log2 n` for an integer, with the `log2 0 = 0` convention.
pub fn log2_int_bounds(n: u64, prec: u32) -> Bounds {
    log2_bounds(&Bounds::integer(n), prec)
}

/// `floor(log2 n)` for `n >= 1`, exact.
pub fn floor_log2_big(n: &BigUint) -> u64 {
    assert!(!n.is_zero());
    n.bits() - 1
}

/// Enclosure of `2^(-num/den)` with at least `prec` fractional bits.
///
/// With `P = prec + ceil(num/den)`, the lower endpoint is `j / 2^P` where `j`
/// is the integer `den`-th root of `2^(den*P - num)`; the bound is exact when
/// the root is.
pub fn pow2_neg_ratio_bounds(num: u64, den: u64, prec: u32) -> Bounds {
    assert!(den > 0);
    if num.is_multiple_of(den) {
        return Bounds::exact(DyadicRational::pow2_neg(num / den));
    }
    let p = prec as u64 + num.div_ceil(den);
    let radicand = BigUint::one() << (den * p - num);
    let j = radicand.nth_root(den as u32);
    let lo = DyadicRational::new(j.clone(), p);
    if j.pow(den as u32) == radicand {
        return Bounds::exact(lo);
    }
    Bounds::new(lo, DyadicRational::new(j + 1u32, p))
}
