//! Computing one left-c.e. real from another with oracle use `floor(n + g(n))`.
//!
//! With the oracle prefix `Omega|L`, `L = floor(n + g(n))`, find the first
//! stage `s` whose approximation `Omega_s` agrees with it on `L` bits and
//! answer `alpha_s(n)`. [`build_solovay_test`] enumerates the strings whose
//! finiteness makes this eventually correct when `Omega` is random.

use std::cell::Cell;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitreal::{bit_of, prefix_of, BitPrefix, DyadicRational};
use crate::machine::LeftCEApproximation;
use crate::randomness::SolovayTest;
use crate::report::Csv;
use crate::series::{RedundancyFunction, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("oracle has {have} bits, need {need}")]
    OracleTooShort { need: usize, have: usize },
    #[error("oracle read at position {pos} beyond use bound {bound}")]
    UseBoundExceeded { pos: usize, bound: usize },
    #[error("target index must be at least 1")]
    ZeroIndex,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Oracle access that refuses reads past a fixed use bound and records the
/// furthest position read.
pub struct UseBoundedOracle<'a> {
    bits: &'a BitPrefix,
    bound: usize,
    furthest: Cell<usize>,
}

impl<'a> UseBoundedOracle<'a> {
    pub fn new(bits: &'a BitPrefix, bound: usize) -> Result<Self, ReductionError> {
        if bits.len() < bound {
            return Err(ReductionError::OracleTooShort {
                need: bound,
                have: bits.len(),
            });
        }
        Ok(UseBoundedOracle {
            bits,
            bound,
            furthest: Cell::new(0),
        })
    }

    /// Bit `pos`, 1-based.
    pub fn read(&self, pos: usize) -> Result<bool, ReductionError> {
        if pos == 0 || pos > self.bound {
            return Err(ReductionError::UseBoundExceeded {
                pos,
                bound: self.bound,
            });
        }
        self.furthest.set(self.furthest.get().max(pos));
        Ok(self.bits.bits()[pos - 1])
    }

    /// Bits `1..=len`.
    pub fn read_prefix(&self, len: usize) -> Result<BitPrefix, ReductionError> {
        (1..=len).map(|p| self.read(p)).collect::<Result<Vec<_>, _>>().map(BitPrefix::new)
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Furthest position read so far.
    pub fn used(&self) -> usize {
        self.furthest.get()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    pub n: u64,
    pub oracle_bits_used: usize,
    pub stages_run: u64,
    pub answer: bool,
    pub settled: bool,
}

/// Strings `sigma_s = Omega_(s+1) | floor(n + g(n))` for every stage
/// `s < max_stage` where `n <= s` is the least bit on which `alpha_s` and
/// `alpha_(s+1)` differ.
pub fn build_solovay_test(
    alpha: &LeftCEApproximation,
    omega: &LeftCEApproximation,
    g: &RedundancyFunction,
    max_stage: u64,
) -> Result<SolovayTest, ReductionError> {
    let mut test = SolovayTest::new();
    for s in 0..max_stage {
        let (a, b) = (alpha.stage_value(s), alpha.stage_value(s + 1));
        if a == b {
            continue;
        }
        let Some(n) = (1..=s).find(|&n| bit_of(a, n as usize) != bit_of(b, n as usize)) else {
            continue;
        };
        let len = g.floor_eval(n)? as usize;
        let sigma = prefix_of(omega.stage_value(s + 1), len)
            .expect("approximations of reals in [0, 1)");
        test.push(s, sigma);
    }
    Ok(test)
}

/// Exact `sum 2^-|sigma|`.
pub fn solovay_weight(t: &SolovayTest) -> DyadicRational {
    t.weight()
}

/// `alpha(n)` from the first `floor(n + g(n))` bits of the oracle.
pub fn reduce(
    oracle: &BitPrefix,
    alpha: &LeftCEApproximation,
    omega: &LeftCEApproximation,
    g: &RedundancyFunction,
    n: u64,
    max_stage: u64,
) -> Result<ReductionTrace, ReductionError> {
    if n == 0 {
        return Err(ReductionError::ZeroIndex);
    }
    let access = UseBoundedOracle::new(oracle, g.floor_eval(n)? as usize)?;
    reduce_with(&access, alpha, omega, n, max_stage)
}

/// [`reduce`] against an oracle whose use bound is already fixed; every
/// bit up to the bound is read once, nothing beyond it.
pub fn reduce_with(
    access: &UseBoundedOracle,
    alpha: &LeftCEApproximation,
    omega: &LeftCEApproximation,
    n: u64,
    max_stage: u64,
) -> Result<ReductionTrace, ReductionError> {
    let len = access.bound();
    let target = access.read_prefix(len)?;
    let mut s = 0;
    let settled = loop {
        let w = omega.stage_value(s);
        if w.is_below_one() && prefix_of(w, len).expect("below one") == target {
            break true;
        }
        if s == max_stage {
            break false;
        }
        s += 1;
    };
    Ok(ReductionTrace {
        n,
        oracle_bits_used: access.used(),
        stages_run: s + 1,
        answer: bit_of(alpha.stage_value(s), n as usize),
        settled,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    #[serde(flatten)]
    pub trace: ReductionTrace,
    /// Settled and equal to the bit of the exact limit.
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectnessReport {
    /// Least `n0` with every `n` in `[n0, N]` correct; `N + 1` if `n = N`
    /// itself is wrong.
    pub threshold: u64,
    pub rows: Vec<TraceRow>,
}

/// Run [`reduce`] with the true oracle `Omega | floor(N + g(N))` for every
/// `n <= N` and locate the last error.
pub fn eventual_correctness(
    alpha: &LeftCEApproximation,
    omega: &LeftCEApproximation,
    g: &RedundancyFunction,
    n_max: u64,
    max_stage: u64,
) -> Result<CorrectnessReport, ReductionError> {
    let len = (1..=n_max)
        .map(|n| g.floor_eval(n))
        .try_fold(0, |m, l| l.map(|l| m.max(l)))? as usize;
    let oracle = prefix_of(omega.limit(), len).expect("limit below one");
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let trace = reduce(&oracle, alpha, omega, g, n, max_stage)?;
            let correct = trace.settled && trace.answer == bit_of(alpha.limit(), n as usize);
            Ok(TraceRow { trace, correct })
        })
        .collect::<Result<Vec<_>, ReductionError>>()?;
    let threshold = rows
        .iter()
        .rposition(|r| !r.correct)
        .map_or(1, |i| i as u64 + 2);
    Ok(CorrectnessReport { threshold, rows })
}

pub fn eventual_correctness_threshold(
    alpha: &LeftCEApproximation,
    omega: &LeftCEApproximation,
    g: &RedundancyFunction,
    n_max: u64,
    max_stage: u64,
) -> Result<u64, ReductionError> {
    Ok(eventual_correctness(alpha, omega, g, n_max, max_stage)?.threshold)
}

/// CSV with columns `n,use,stages,answer,settled,correct`.
pub fn write_trace_csv(out: &mut dyn Write, rows: &[TraceRow]) -> io::Result<()> {
    let mut csv = Csv::new(out, &["n", "use", "stages", "answer", "settled", "correct"])?;
    for r in rows {
        let t = &r.trace;
        csv.row(&[
            t.n.to_string(),
            t.oracle_bits_used.to_string(),
            t.stages_run.to_string(),
            (t.answer as u8).to_string(),
            t.settled.to_string(),
            r.correct.to_string(),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{as_left_ce, sum_left_ce, GeneratorConfig, MachineTable};
    use crate::series::Epsilon;
    use proptest::prelude::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn approx(values: &[&str]) -> LeftCEApproximation {
        LeftCEApproximation::from_values(values.iter().map(|v| d(v)).collect()).unwrap()
    }

    fn h2() -> RedundancyFunction {
        RedundancyFunction::h_eps(Epsilon::integer(2).unwrap())
    }

    #[test]
    fn single_change_gives_one_string() {
        let alpha = approx(&["0", "0", "0", "1/4"]);
        let omega = approx(&["0", "1/8", "1/4", "5/16"]);
        let t = build_solovay_test(&alpha, &omega, &h2(), 3).unwrap();
        assert_eq!(t.lengths(), vec![4]);
        let (s, sigma) = t.members().next().unwrap();
        assert_eq!(s, 2);
        assert_eq!(sigma.to_string(), "0101");
    }

    #[test]
    fn constant_alpha_gives_empty_test() {
        let alpha = LeftCEApproximation::constant(d("3/8"));
        let omega = approx(&["0", "1/2"]);
        let t = build_solovay_test(&alpha, &omega, &h2(), 10).unwrap();
        assert!(t.is_empty());
        assert_eq!(solovay_weight(&t), DyadicRational::zero());
    }

    #[test]
    fn bit_one_once_bit_two_twice() {
        let alpha = approx(&["0", "0", "0", "1/4", "1/2", "3/4"]);
        let omega = alpha.clone();
        let t = build_solovay_test(&alpha, &omega, &h2(), 5).unwrap();
        let mut lengths = t.lengths();
        lengths.sort_unstable();
        assert_eq!(lengths, vec![1, 4, 4]);
        assert_eq!(solovay_weight(&t), d("5/8"));
    }

    #[test]
    fn self_reduction_reads_the_oracle() {
        let m: MachineTable = "0 3\n10 5\n1101 9\n".parse().unwrap();
        let omega = as_left_ce(&m);
        let oracle = prefix_of(omega.limit(), 80).unwrap();
        for n in 1..=40 {
            let t = reduce(&oracle, &omega, &omega, &h2(), n, 20).unwrap();
            assert!(t.settled);
            assert_eq!(t.answer, oracle.bit_at(n as usize).unwrap());
            assert_eq!(t.oracle_bits_used as u64, h2().floor_eval(n).unwrap());
        }
        assert_eq!(eventual_correctness_threshold(&omega, &omega, &h2(), 40, 20).unwrap(), 1);
    }

    #[test]
    fn two_entry_machine_bit_one() {
        let m: MachineTable = "0 3\n10 5\n".parse().unwrap();
        let omega = as_left_ce(&m);
        assert_eq!(omega.stabilization_stage(), 5);
        let oracle = prefix_of(omega.limit(), 8).unwrap();
        let t = reduce(&oracle, &omega, &omega, &h2(), 1, 10).unwrap();
        assert_eq!(t.answer, bit_of(omega.limit(), 1));
    }

    #[test]
    fn constant_alpha_is_always_correct() {
        let alpha = LeftCEApproximation::constant(d("5/8"));
        let omega = approx(&["0", "1/4", "3/8"]);
        assert_eq!(eventual_correctness_threshold(&alpha, &omega, &h2(), 30, 10).unwrap(), 1);
    }

    #[test]
    fn late_change_is_an_early_error() {
        // Omega never moves, so stage 0 matches; alpha gains bit 1 later
        let alpha = approx(&["0", "0", "0", "1/2"]);
        let omega = LeftCEApproximation::constant(d("1/4"));
        let r = eventual_correctness(&alpha, &omega, &h2(), 10, 10).unwrap();
        assert!(!r.rows[0].correct);
        assert!(r.rows[1..].iter().all(|r| r.correct));
        assert_eq!(r.threshold, 2);
    }

    #[test]
    fn oracle_guards() {
        let omega = approx(&["0", "1/2"]);
        let short: BitPrefix = "10".parse().unwrap();
        assert_eq!(
            reduce(&short, &omega, &omega, &h2(), 2, 5),
            Err(ReductionError::OracleTooShort { need: 4, have: 2 })
        );
        let bits: BitPrefix = "1010".parse().unwrap();
        let o = UseBoundedOracle::new(&bits, 3).unwrap();
        assert!(o.read(3).is_ok());
        assert_eq!(o.read(4), Err(ReductionError::UseBoundExceeded { pos: 4, bound: 3 }));
        assert_eq!(o.used(), 3);
    }

    #[test]
    fn csv_layout() {
        let omega = approx(&["0", "1/2"]);
        let r = eventual_correctness(&omega, &omega, &h2(), 2, 5).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&mut out, &r.rows).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "n,use,stages,answer,settled,correct\n1,1,2,1,true,true\n2,4,2,0,true,true\n"
        );
    }

    fn pair(seed: u64) -> (LeftCEApproximation, LeftCEApproximation) {
        let (u, v) = MachineTable::random_pair(seed, &GeneratorConfig::default());
        let alpha = as_left_ce(&u);
        let omega = sum_left_ce(&alpha, &as_left_ce(&v)).unwrap();
        (alpha, omega)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn use_is_exactly_the_bound(seed in any::<u64>(), n in 1u64..=64) {
            let (alpha, omega) = pair(seed);
            let oracle = prefix_of(omega.limit(), 80).unwrap();
            let t = reduce(&oracle, &alpha, &omega, &h2(), n, 300).unwrap();
            prop_assert_eq!(t.oracle_bits_used as u64, h2().floor_eval(n).unwrap());
            prop_assert_eq!(&t, &reduce(&oracle, &alpha, &omega, &h2(), n, 300).unwrap());
        }

        #[test]
        fn settling_stage_ignores_larger_budgets(seed in any::<u64>(), n in 1u64..=64, extra in 0u64..100) {
            let (alpha, omega) = pair(seed);
            let oracle = prefix_of(omega.limit(), 80).unwrap();
            let t = reduce(&oracle, &alpha, &omega, &h2(), n, 300).unwrap();
            prop_assume!(t.settled);
            let budget = t.stages_run - 1 + extra;
            prop_assert_eq!(t, reduce(&oracle, &alpha, &omega, &h2(), n, budget).unwrap());
        }

        #[test]
        fn weight_bounded_by_series(seed in any::<u64>()) {
            let (alpha, omega) = pair(seed);
            let t = build_solovay_test(&alpha, &omega, &h2(), 300).unwrap();
            let bound: num_rational::BigRational = (1..=64u64)
                .map(|n| num_rational::BigRational::new(1.into(), (n * n).into()))
                .sum();
            prop_assert!(t.weight().to_big_rational() <= bound);
        }
    }
}
