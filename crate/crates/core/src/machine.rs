//! Finite prefix-free machine tables and monotone (left-c.e.) approximations.
//!
//! A [`MachineTable`] lists halting programs with the stage at which each
//! halts. Its halting probability is approximated from below by
//! [`omega_approx`]; [`LeftCEApproximation`] is the general interface the
//! constructions consume.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bitreal::{BitPrefix, DyadicRational};

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("programs are not prefix-free: {0} is a prefix of {1}")]
    NotPrefixFree(String, String),
    #[error("Kraft sum {0} exceeds 1")]
    KraftViolation(String),
    #[error("halt time must be positive (program {0})")]
    ZeroHaltTime(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("stage values are not nondecreasing at stage {0}")]
    NotMonotone(usize),
    #[error("sum of limits {0} is not below 1")]
    SumNotBelowOne(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineEntry {
    pub program: BitPrefix,
    pub halt_time: u64,
}

/// Validated prefix-free table of `(program, halt_time)` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineTable {
    entries: Vec<MachineEntry>,
}

/// True iff no string is a proper prefix of another.
///
/// Sorting lexicographically puts every string directly before the strings
/// it prefixes, so checking neighbours suffices.
pub fn check_prefix_free<'a>(programs: impl IntoIterator<Item = &'a BitPrefix>) -> bool {
    first_prefix_pair(programs).is_none()
}

fn first_prefix_pair<'a>(
    programs: impl IntoIterator<Item = &'a BitPrefix>,
) -> Option<(BitPrefix, BitPrefix)> {
    let sorted: BTreeSet<&BitPrefix> = programs.into_iter().collect();
    let sorted: Vec<_> = sorted.into_iter().collect();
    sorted
        .windows(2)
        .find(|w| w[0].is_prefix_of(w[1]))
        .map(|w| (w[0].clone(), w[1].clone()))
}

impl MachineTable {
    pub fn new(entries: Vec<MachineEntry>) -> Result<Self, MachineError> {
        if let Some(e) = entries.iter().find(|e| e.halt_time == 0) {
            return Err(MachineError::ZeroHaltTime(e.program.to_string()));
        }
        // Duplicates count as prefixes of each other.
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(&e.program) {
                let s = e.program.to_string();
                return Err(MachineError::NotPrefixFree(s.clone(), s));
            }
        }
        if let Some((a, b)) = first_prefix_pair(entries.iter().map(|e| &e.program)) {
            return Err(MachineError::NotPrefixFree(a.to_string(), b.to_string()));
        }
        let table = MachineTable { entries };
        let k = table.kraft_sum();
        if k > DyadicRational::one() {
            return Err(MachineError::KraftViolation(k.to_string()));
        }
        Ok(table)
    }

    pub fn entries(&self) -> &[MachineEntry] {
        &self.entries
    }

    /// Exact `sum 2^-|p|`.
    pub fn kraft_sum(&self) -> DyadicRational {
        self.entries
            .iter()
            .map(|e| DyadicRational::pow2_neg(e.program.len() as u64))
            .sum()
    }

    pub fn max_halt_time(&self) -> u64 {
        self.entries.iter().map(|e| e.halt_time).max().unwrap_or(0)
    }

    pub fn max_program_len(&self) -> usize {
        self.entries.iter().map(|e| e.program.len()).max().unwrap_or(0)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MachineError> {
        std::fs::read_to_string(path)?.parse()
    }

    /// Random prefix-free table: programs are leaves of a random binary tree
    /// of depth at most `max_depth`, halt times uniform in `halt_range`.
    ///
    /// At least one leaf is always left unused, so the Kraft sum is strictly
    /// below 1.
    pub fn random(seed: u64, config: &GeneratorConfig) -> MachineTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut leaves = Vec::new();
        grow(&mut rng, BitPrefix::empty(), config, &mut leaves);
        // leaves are in left-to-right order; drop one to keep Kraft < 1
        let skip = rng.gen_range(0..leaves.len());
        let mut entries = Vec::new();
        for (i, program) in leaves.into_iter().enumerate() {
            if i == skip || !rng.gen_bool(config.keep_probability) {
                continue;
            }
            entries.push(MachineEntry {
                program,
                halt_time: rng.gen_range(config.halt_min..=config.halt_max),
            });
        }
        MachineTable::new(entries).expect("generator produces valid tables")
    }
}

fn grow(rng: &mut ChaCha8Rng, node: BitPrefix, config: &GeneratorConfig, out: &mut Vec<BitPrefix>) {
    let split = node.len() < config.min_depth
        || (node.len() < config.max_depth && rng.gen_bool(config.split_probability));
    if split {
        grow(rng, node.extended(false), config, out);
        grow(rng, node.extended(true), config, out);
    } else {
        out.push(node);
    }
}

impl MachineTable {
    /// The same table with `bit` prepended to every program; the Kraft sum
    /// halves.
    pub fn prefixed(&self, bit: bool) -> MachineTable {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut program = BitPrefix::new(vec![bit]);
                for &b in e.program.bits() {
                    program.push(b);
                }
                MachineEntry {
                    program,
                    halt_time: e.halt_time,
                }
            })
            .collect();
        MachineTable::new(entries).expect("prefixing keeps the code prefix-free")
    }

    /// Two tables whose union is again prefix-free: the first lives under
    /// program prefix `0`, the second under `1`. Their halting
    /// probabilities therefore sum to less than 1.
    pub fn random_pair(seed: u64, config: &GeneratorConfig) -> (MachineTable, MachineTable) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (rng.gen(), rng.gen());
        (
            MachineTable::random(a, config).prefixed(false),
            MachineTable::random(b, config).prefixed(true),
        )
    }
}

/// Parameters of [`MachineTable::random`].
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub min_depth: usize,
    pub max_depth: usize,
    pub split_probability: f64,
    pub keep_probability: f64,
    pub halt_min: u64,
    pub halt_max: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_depth: 1,
            max_depth: 16,
            split_probability: 0.6,
            keep_probability: 0.85,
            halt_min: 1,
            halt_max: 200,
        }
    }
}

impl FromStr for MachineTable {
    type Err = MachineError;

    /// One entry per line: `program-bits halt-time`. `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| MachineError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let mut fields = line.split_whitespace();
            let (Some(prog), Some(time), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(err("expected `program halt-time`"));
            };
            let program = prog.parse().map_err(|_| err("program must be a bit string"))?;
            let halt_time = time.parse().map_err(|_| err("halt time must be an integer"))?;
            entries.push(MachineEntry { program, halt_time });
        }
        MachineTable::new(entries)
    }
}

impl fmt::Display for MachineTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{} {}", e.program, e.halt_time)?;
        }
        Ok(())
    }
}

/// `sum 2^-|p|` over entries halted by stage `s`.
pub fn omega_approx(m: &MachineTable, s: u64) -> DyadicRational {
    m.entries
        .iter()
        .filter(|e| e.halt_time <= s)
        .map(|e| DyadicRational::pow2_neg(e.program.len() as u64))
        .sum()
}

/// A nondecreasing stage sequence together with its exact limit.
///
/// Stored densely: `values[s]` for `s < values.len()`, constant afterwards.
/// Knowing the limit is test scaffolding; the reductions themselves only call
/// [`LeftCEApproximation::stage_value`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftCEApproximation {
    values: Vec<DyadicRational>,
}

impl LeftCEApproximation {
    pub fn from_values(values: Vec<DyadicRational>) -> Result<Self, MachineError> {
        if let Some(s) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(MachineError::NotMonotone(s + 1));
        }
        let values = if values.is_empty() {
            vec![DyadicRational::zero()]
        } else {
            values
        };
        Ok(LeftCEApproximation { values })
    }

    pub fn constant(x: DyadicRational) -> Self {
        LeftCEApproximation { values: vec![x] }
    }

    pub fn stage_value(&self, s: u64) -> &DyadicRational {
        let i = (s as usize).min(self.values.len() - 1);
        &self.values[i]
    }

    pub fn limit(&self) -> &DyadicRational {
        self.values.last().expect("never empty")
    }

    /// Least stage from which the value equals the limit.
    pub fn stabilization_stage(&self) -> u64 {
        let lim = self.limit();
        self.values.iter().position(|v| v == lim).unwrap_or(0) as u64
    }
}

pub fn as_left_ce(m: &MachineTable) -> LeftCEApproximation {
    let last = m.max_halt_time();
    LeftCEApproximation {
        values: (0..=last).map(|s| omega_approx(m, s)).collect(),
    }
}

/// Pointwise sum; the limits must add to less than 1.
pub fn sum_left_ce(
    a: &LeftCEApproximation,
    b: &LeftCEApproximation,
) -> Result<LeftCEApproximation, MachineError> {
    let total = a.limit() + b.limit();
    if !total.is_below_one() {
        return Err(MachineError::SumNotBelowOne(total.to_string()));
    }
    let len = a.values.len().max(b.values.len());
    let values = (0..len as u64)
        .map(|s| a.stage_value(s) + b.stage_value(s))
        .collect();
    Ok(LeftCEApproximation { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bp(s: &str) -> BitPrefix {
        s.parse().unwrap()
    }

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn table(text: &str) -> MachineTable {
        text.parse().unwrap()
    }

    #[test]
    fn prefix_free_examples() {
        assert!(check_prefix_free(&[bp("0"), bp("10"), bp("110")]));
        assert!(!check_prefix_free(&[bp("0"), bp("01")]));
        assert!(check_prefix_free(&[]));
        // non-adjacent after sorting would still be caught through the chain
        assert!(!check_prefix_free(&[bp("1"), bp("100"), bp("101"), bp("0")]));
    }

    #[test]
    fn kraft_examples() {
        assert_eq!(table("0 1\n10 1\n110 1").kraft_sum(), d("7/8"));
        assert_eq!(table("0 1\n1 1").kraft_sum(), DyadicRational::one());
        assert_eq!(table("00 1").kraft_sum(), d("1/4"));
    }

    #[test]
    fn omega_approx_examples() {
        let m = table("0 3\n10 5");
        assert_eq!(omega_approx(&m, 4), d("1/2"));
        assert_eq!(omega_approx(&m, 5), d("3/4"));
        assert_eq!(omega_approx(&m, 0), DyadicRational::zero());
    }

    #[test]
    fn as_left_ce_examples() {
        let a = as_left_ce(&table("0 3\n10 5"));
        assert_eq!(a.limit(), &d("3/4"));
        assert_eq!(a.stabilization_stage(), 5);
        let e = as_left_ce(&table(""));
        assert_eq!(e.limit(), &DyadicRational::zero());
        assert_eq!(e.stage_value(100), &DyadicRational::zero());
        let one = as_left_ce(&table("1 1"));
        assert_eq!(one.limit(), &d("1/2"));
        assert_eq!(one.stabilization_stage(), 1);
    }

    #[test]
    fn sum_left_ce_examples() {
        let a = LeftCEApproximation::constant(d("1/2"));
        let b = LeftCEApproximation::constant(d("1/4"));
        assert_eq!(sum_left_ce(&a, &b).unwrap().limit(), &d("3/4"));

        let m = as_left_ce(&table("0 3\n10 5"));
        let z = LeftCEApproximation::constant(DyadicRational::zero());
        let s = sum_left_ce(&m, &z).unwrap();
        for st in 0..10 {
            assert_eq!(s.stage_value(st), m.stage_value(st));
        }

        let a = LeftCEApproximation::from_values(vec![d("0"), d("1/4"), d("1/4")]).unwrap();
        let b = LeftCEApproximation::from_values(vec![d("0"), d("0"), d("1/8")]).unwrap();
        let s = sum_left_ce(&a, &b).unwrap();
        assert_eq!(
            (0..3).map(|i| s.stage_value(i).clone()).collect::<Vec<_>>(),
            vec![d("0"), d("1/4"), d("3/8")]
        );

        let big = LeftCEApproximation::constant(d("1/2"));
        assert!(matches!(sum_left_ce(&big, &big), Err(MachineError::SumNotBelowOne(_))));
    }

    #[test]
    fn loader_validates() {
        let m = table("# comment\n0   3  # trailing\n\n10 5\n");
        assert_eq!(m.entries().len(), 2);
        assert!(matches!("0 1\n01 2".parse::<MachineTable>(), Err(MachineError::NotPrefixFree(..))));
        assert!(matches!("0 x".parse::<MachineTable>(), Err(MachineError::Parse { line: 1, .. })));
        assert!(matches!("0 1\n0 2".parse::<MachineTable>(), Err(MachineError::NotPrefixFree(..))));
        assert!(matches!("2 1".parse::<MachineTable>(), Err(MachineError::Parse { .. })));
        assert!(matches!("0 0".parse::<MachineTable>(), Err(MachineError::ZeroHaltTime(_))));
        assert_eq!(table(&m.to_string()), m);
    }

    #[test]
    fn from_values_rejects_decrease() {
        assert!(LeftCEApproximation::from_values(vec![d("1/2"), d("1/4")]).is_err());
    }

    #[test]
    fn generator_is_deterministic() {
        let c = GeneratorConfig::default();
        assert_eq!(MachineTable::random(7, &c), MachineTable::random(7, &c));
        assert_ne!(MachineTable::random(7, &c), MachineTable::random(8, &c));
    }

    proptest! {
        #[test]
        fn random_tables_are_valid_and_monotone(seed in any::<u64>()) {
            let m = MachineTable::random(seed, &GeneratorConfig::default());
            prop_assert!(check_prefix_free(m.entries().iter().map(|e| &e.program)));
            prop_assert!(m.kraft_sum() < DyadicRational::one());
            let k = m.kraft_sum();
            let mut prev = DyadicRational::zero();
            for s in 0..=m.max_halt_time() + 1 {
                let v = omega_approx(&m, s);
                prop_assert!(prev <= v && v <= k);
                prev = v;
            }
            prop_assert_eq!(omega_approx(&m, m.max_halt_time()), k);
        }

        #[test]
        fn kraft_ignores_halt_times(seed in any::<u64>(), shift in 1u64..50) {
            let m = MachineTable::random(seed, &GeneratorConfig::default());
            let permuted: Vec<_> = m.entries().iter().rev().zip(m.entries()).map(|(a, b)| MachineEntry {
                program: a.program.clone(),
                halt_time: b.halt_time + shift,
            }).collect();
            prop_assert_eq!(MachineTable::new(permuted).unwrap().kraft_sum(), m.kraft_sum());
        }

        #[test]
        fn sums_stay_monotone(s1 in any::<u64>(), s2 in any::<u64>()) {
            let c = GeneratorConfig::default();
            let a = as_left_ce(&MachineTable::random(s1, &c)).limit().shr(1);
            let b = as_left_ce(&MachineTable::random(s2, &c));
            let a = LeftCEApproximation::from_values(vec![DyadicRational::zero(), a]).unwrap();
            let halved = LeftCEApproximation::from_values(
                (0..=b.stabilization_stage()).map(|s| b.stage_value(s).shr(1)).collect()).unwrap();
            let sum = sum_left_ce(&a, &halved).unwrap();
            for s in 0..300 {
                prop_assert!(sum.stage_value(s) <= sum.stage_value(s + 1));
            }
        }
    }
}
