use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::adversary;
use super::certified::{log2_bounds, log2_int_bounds, Bounds};
use super::interval::Interval;
use super::SeriesError;
use crate::bitreal::DyadicRational;

/// Starting precision (fractional bits) of the adaptive floor evaluation.
const START_PREC: u32 = 32;
/// The adaptive evaluation gives up beyond this precision.
pub const MAX_PREC: u32 = 1 << 13;

/// A rational `num/den >= 1`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

impl Epsilon {
    pub const ONE: Epsilon = Epsilon { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, SeriesError> {
        if den == 0 {
            return Err(SeriesError::Parse(format!("{num}/0")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        if num < den {
            return Err(SeriesError::EpsilonBelowOne(format!("{num}/{den}")));
        }
        Ok(Epsilon { num, den })
    }

    pub fn integer(n: u64) -> Result<Self, SeriesError> {
        Self::new(n, 1)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    fn interval(&self) -> Interval {
        let x = self.num as f64 / self.den as f64;
        if self.den == 1 && self.num < (1 << 53) {
            Interval::point(x)
        } else {
            Interval::new(x.next_down(), x.next_up())
        }
    }
}

impl FromStr for Epsilon {
    type Err = SeriesError;

    /// `2`, `3/2` or a finite decimal such as `1.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || SeriesError::Parse(s.to_string());
        if let Some((a, b)) = s.split_once('/') {
            return Epsilon::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u64.pow(frac.len() as u32);
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            let num = int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
            return Epsilon::new(num, den);
        }
        Epsilon::new(s.parse().map_err(|_| bad())?, 1)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A redundancy bound `g`; oracle use for argument `n` is `floor(n + g(n))`.
///
/// All kinds use the `log 0 = 0` convention, and `g(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RedundancyFunction {
    /// `eps * log n`
    HEps(Epsilon),
    /// `log n + eps * log log n`
    HStar(Epsilon),
    /// `log f(n)` where `f` is `m_j = 2^(2^j + j)` on the `j`-th block of
    /// `m_j` consecutive positions.
    Adversarial,
    /// `g(n) = values[n - 1]`; the last value persists past the table.
    Table(Vec<DyadicRational>),
}

impl RedundancyFunction {
    pub fn log() -> Self {
        RedundancyFunction::HEps(Epsilon::ONE)
    }

    pub fn h_eps(eps: Epsilon) -> Self {
        RedundancyFunction::HEps(eps)
    }

    pub fn h_star(eps: Epsilon) -> Self {
        RedundancyFunction::HStar(eps)
    }

    pub fn table(values: Vec<DyadicRational>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::EmptyTable);
        }
        if let Some(i) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(SeriesError::NotMonotone(i as u64 + 2));
        }
        Ok(RedundancyFunction::Table(values))
    }

    /// Short name used in reports.
    pub fn name(&self) -> String {
        match self {
            RedundancyFunction::HEps(e) if *e == Epsilon::ONE => "log".into(),
            RedundancyFunction::HEps(e) => format!("h_eps({e})"),
            RedundancyFunction::HStar(e) => format!("h_star({e})"),
            RedundancyFunction::Adversarial => "adversarial".into(),
            RedundancyFunction::Table(v) => format!("table({})", v.len()),
        }
    }

    /// Certified enclosure of `g(n)` with about `prec` fractional bits.
    pub fn bounds(&self, n: u64, prec: u32) -> Result<Bounds, SeriesError> {
        if n == 0 {
            return Ok(Bounds::integer(0));
        }
        Ok(match self {
            RedundancyFunction::HEps(e) => log2_int_bounds(n, prec).mul_ratio(e.num, e.den, prec),
            RedundancyFunction::HStar(e) => {
                let l = log2_int_bounds(n, prec);
                let ll = log2_bounds(&l, prec);
                l.add(&ll.mul_ratio(e.num, e.den, prec))
            }
            RedundancyFunction::Adversarial => Bounds::integer(adversary::adversarial_g(n)?),
            RedundancyFunction::Table(v) => Bounds::exact(table_value(v, n).clone()),
        })
    }

    /// Exact `floor(g(n))`.
    pub fn floor_g(&self, n: u64) -> Result<u64, SeriesError> {
        if n <= 1 {
            // log 1 = log 0 = 0 for both logarithmic kinds
            if matches!(self, RedundancyFunction::HEps(_) | RedundancyFunction::HStar(_)) {
                return Ok(0);
            }
        }
        match self {
            RedundancyFunction::HEps(e) => Ok(floor_eps_log(n, e)),
            RedundancyFunction::HStar(e) if n.is_power_of_two() => {
                let l = n.trailing_zeros() as u64;
                Ok(l + floor_eps_log(l, e))
            }
            RedundancyFunction::HStar(_) => self.floor_g_by_intervals(n),
            RedundancyFunction::Adversarial => adversary::adversarial_g(n),
            RedundancyFunction::Table(v) => {
                Ok(table_value(v, n).floor().to_u64().ok_or(SeriesError::Overflow)?)
            }
        }
    }

    /// `floor(g(n))` from interval enclosures alone, doubling the precision
    /// until the enclosure excludes every integer boundary.
    pub fn floor_g_by_intervals(&self, n: u64) -> Result<u64, SeriesError> {
        let mut prec = START_PREC;
        while prec <= MAX_PREC {
            if let Some(f) = self.bounds(n, prec)?.certified_floor() {
                return Ok(f);
            }
            prec *= 2;
        }
        Err(SeriesError::Unresolved(n))
    }

    /// The oracle use `floor(n + g(n))`.
    pub fn floor_eval(&self, n: u64) -> Result<u64, SeriesError> {
        Ok(n + self.floor_g(n)?)
    }

    /// Fast double-precision enclosure of `g(n)`.
    pub fn enclosure(&self, n: u64) -> Result<Interval, SeriesError> {
        if n == 0 {
            return Ok(Interval::zero());
        }
        Ok(match self {
            RedundancyFunction::HEps(e) => {
                let l = Interval::point(n as f64).log2();
                l.mul_nonneg(e.interval())
            }
            RedundancyFunction::HStar(e) => {
                let l = Interval::point(n as f64).log2();
                let ll = l.log2();
                l + ll.mul_nonneg(e.interval())
            }
            RedundancyFunction::Adversarial => Interval::point(adversary::adversarial_g(n)? as f64),
            RedundancyFunction::Table(v) => {
                let x = table_value(v, n).to_f64();
                Interval::new(x.next_down().max(0.0), x.next_up())
            }
        })
    }

    /// Enclosure of `2^-g(n)`.
    pub fn term(&self, n: u64) -> Result<Interval, SeriesError> {
        match self {
            RedundancyFunction::HEps(e) if e.is_integer() && n > 0 => {
                // n^-eps as 1 / n^eps when n^eps is an exact double
                if let Some(p) = (n as u128).checked_pow(e.num as u32).filter(|&p| p < (1 << 53)) {
                    return Ok(Interval::recip_int(p as u64));
                }
                Ok(self.enclosure(n)?.exp2_neg())
            }
            RedundancyFunction::Adversarial if n > 0 => {
                Ok(Interval::point(2f64.powi(-(adversary::adversarial_g(n)? as i32))))
            }
            _ => Ok(self.enclosure(n)?.exp2_neg()),
        }
    }
}

impl fmt::Display for RedundancyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn table_value(v: &[DyadicRational], n: u64) -> &DyadicRational {
    let i = (n as usize).saturating_sub(1).min(v.len() - 1);
    &v[i]
}

/// `floor(eps * log2 n) = floor(floor(log2 n^p) / q)` for `eps = p/q`, exact.
fn floor_eps_log(n: u64, e: &Epsilon) -> u64 {
    if n <= 1 {
        return 0;
    }
    let power = BigUint::from(n).pow(e.num as u32);
    (power.bits() - 1) / e.den
}
