use serde::Serialize;

use super::interval::Interval;
use super::redundancy::{Epsilon, RedundancyFunction};
use super::SeriesError;

/// Enclosure of `sum_{n=1}^{N} 2^-g(n)`.
pub fn partial_sum(g: &RedundancyFunction, n_max: u64) -> Result<Interval, SeriesError> {
    let mut s = Interval::zero();
    for n in 1..=n_max {
        s = s + g.term(n)?;
    }
    Ok(s)
}

/// Partial sums at each checkpoint (ascending), in a single pass.
pub fn partial_sums_at(
    g: &RedundancyFunction,
    checkpoints: &[u64],
) -> Result<Vec<(u64, Interval)>, SeriesError> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut s = Interval::zero();
    let mut n = 0;
    for &c in checkpoints {
        while n < c {
            n += 1;
            s = s + g.term(n)?;
        }
        out.push((c, s));
    }
    Ok(out)
}

/// Upper bound on the whole series `sum_{n>=1} n^-eps` for `eps > 1`:
/// the partial sum to `N` plus the integral tail `N^(1-eps) / (eps - 1)`.
pub fn h_eps_series_upper_bound(eps: Epsilon, n_max: u64) -> Result<f64, SeriesError> {
    if eps.num() <= eps.den() {
        return Err(SeriesError::Divergent);
    }
    let s = partial_sum(&RedundancyFunction::h_eps(eps), n_max)?;
    let e = eps.num() as f64 / eps.den() as f64;
    let tail = (n_max as f64).powf(1.0 - e) / (e - 1.0);
    // round the tail up generously; it only needs to be an upper bound
    Ok((s.hi + tail * (1.0 + 1e-12)).next_up())
}

/// Built-in nonincreasing summands for the condensation comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summand {
    /// `1/n`
    Inverse,
    /// `2^-n`
    Geometric,
    /// `1`
    Constant,
}

impl Summand {
    pub fn eval(self, n: u64) -> Interval {
        match self {
            Summand::Inverse => Interval::recip_int(n),
            Summand::Geometric => {
                if n <= 1074 {
                    Interval::point(2f64.powi(-(n as i32)))
                } else {
                    Interval::new(0.0, f64::from_bits(1))
                }
            }
            Summand::Constant => Interval::point(1.0),
        }
    }
}

impl std::str::FromStr for Summand {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inverse" | "1/n" => Ok(Summand::Inverse),
            "geometric" | "2^-n" => Ok(Summand::Geometric),
            "constant" | "1" => Ok(Summand::Constant),
            _ => Err(SeriesError::Parse(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CondensationRow {
    /// Row `k` covers `n <= 2^k`.
    pub k: u32,
    /// Condensed terms summed: `j = 0..=k`.
    pub terms: u32,
    #[serde(serialize_with = "crate::report::ser_interval")]
    pub direct: Interval,
    #[serde(serialize_with = "crate::report::ser_interval")]
    pub condensed: Interval,
}

/// Direct partial sums `sum_{n<=2^k} f(n)` beside condensed partial sums
/// `sum_{j<=k} 2^j f(2^j)`, for `2^k <= n_max`.
pub fn condensation_compare(
    f: impl Fn(u64) -> Interval,
    n_max: u64,
) -> Result<Vec<CondensationRow>, SeriesError> {
    let mut rows = Vec::new();
    let mut direct = Interval::zero();
    let mut condensed = Interval::zero();
    let mut prev: Option<Interval> = None;
    let mut next_pow = 1u64;
    let mut k = 0u32;
    for n in 1..=n_max {
        let v = f(n);
        if let Some(p) = prev {
            if v.lo > p.hi {
                return Err(SeriesError::NotMonotone(n));
            }
        }
        prev = Some(v);
        direct = direct + v;
        if n == next_pow {
            condensed = condensed + v.ldexp(k as i32);
            rows.push(CondensationRow {
                k,
                terms: k + 1,
                direct,
                condensed,
            });
            k += 1;
            next_pow <<= 1;
        }
    }
    Ok(rows)
}
