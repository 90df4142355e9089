//! Double-precision enclosures with outward rounding.
//!
//! Every operation rounds to nearest and then steps one ulp outward, so the
//! result contains the exact value of the operation applied to any points of
//! the operands. Transcendental functions are widened by [`LIBM_ULPS`] extra
//! ulps to cover library error.

use std::fmt;
use std::ops::Add;

/// Ulps of widening applied after `log2`/`exp2`.
pub const LIBM_ULPS: u32 = 2;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |x, _| x.next_down())
}

fn up(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |x, _| x.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval {lo} > {hi}");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    /// Enclosure of `1/n`.
    pub fn recip_int(n: u64) -> Self {
        let x = 1.0 / n as f64;
        if n < (1 << 53) && n.is_power_of_two() {
            Self::point(x)
        } else {
            Self::new(down(x, 1).max(0.0), up(x, 1))
        }
    }

    /// Enclosure of `2^-x` for `x` in this interval.
    pub fn exp2_neg(self) -> Self {
        let lo = (-self.hi).exp2();
        let hi = (-self.lo).exp2();
        Self::new(down(lo, LIBM_ULPS).max(0.0), up(hi, LIBM_ULPS))
    }

    /// Enclosure of `log2 x` for `x` in this interval; `log2 0 = 0`.
    pub fn log2(self) -> Self {
        let f = |x: f64| if x <= 0.0 { 0.0 } else { x.log2() };
        let lo = if self.lo <= 0.0 { 0.0 } else { down(f(self.lo), LIBM_ULPS) };
        let hi = if self.hi <= 0.0 { 0.0 } else { up(f(self.hi), LIBM_ULPS) };
        Self::new(lo.min(hi), hi)
    }

    /// Product of nonnegative intervals.
    pub fn mul_nonneg(self, o: Interval) -> Self {
        debug_assert!(self.lo >= 0.0 && o.lo >= 0.0);
        Self::new(down(self.lo * o.lo, 1).max(0.0), up(self.hi * o.hi, 1))
    }

    /// Exact scaling by `2^k`, assuming no overflow or underflow.
    pub fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        let lo = self.lo * s;
        let hi = self.hi * s;
        // underflow to subnormals can round; widen by one ulp in that case
        if lo != 0.0 && lo.abs() < f64::MIN_POSITIVE || hi.abs() < f64::MIN_POSITIVE {
            Self::new(down(lo, 1).max(0.0), up(hi, 1))
        } else {
            Self::new(lo, hi)
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Certified `floor`, when the interval does not straddle an integer.
    pub fn certified_floor(&self) -> Option<i64> {
        let a = self.lo.floor();
        (a == self.hi.floor()).then_some(a as i64)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, o: Interval) -> Interval {
        let (lo, lo_err) = two_sum(self.lo, o.lo);
        let (hi, hi_err) = two_sum(self.hi, o.hi);
        Interval::new(
            if lo_err >= 0.0 { lo } else { down(lo, 1) },
            if hi_err <= 0.0 { hi } else { up(hi, 1) },
        )
    }
}

/// Knuth's error-free sum: `a + b == s + err` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // shortest round-trip representation: exact as an f64 value
        write!(f, "({:?}, {:?})", self.lo, self.hi)
    }
}
