//! Acceptance criteria 1 to 10, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so that every criterion is attempted and
//! reported even when an earlier one fails. Wall-clock limits are part of
//! each criterion.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use omega_lab::beta::{
    build_beta, choose_cutoff, exhaustive_equivalence, PredictorRule, TrueBitsReducer,
};
use omega_lab::bitreal::{bit_of, BitPrefix, DyadicRational};
use omega_lab::machine::{as_left_ce, sum_left_ce, GeneratorConfig, LeftCEApproximation, MachineTable};
use omega_lab::randomness::{
    brute_force_miss_measure, exact_miss_measure, BlockFamily, Martingale, RuleFn,
};
use omega_lab::reduction::{build_solovay_test, eventual_correctness, CorrectnessReport};
use omega_lab::series::adversary::{block_size, block_weight, even_partition, random_partition, unit_gap_partition};
use omega_lab::series::convergence::h_eps_series_upper_bound;
use omega_lab::series::markers::marker_table;
use omega_lab::series::{
    adversary_analyze, condensation_compare, lemma33_partition, partial_sum, verify_partition,
    Epsilon, Interval, RedundancyFunction, Summand,
};

const CORPUS: u64 = 100;
const N_MAX: u64 = 64;
const MAX_STAGE: u64 = 256;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Pair {
    alpha: LeftCEApproximation,
    omega: LeftCEApproximation,
}

fn corpus() -> Vec<Pair> {
    let config = GeneratorConfig::default();
    (0..CORPUS)
        .map(|seed| {
            let (u, v) = MachineTable::random_pair(seed, &config);
            let alpha = as_left_ce(&u);
            let omega = sum_left_ce(&alpha, &as_left_ce(&v)).expect("prefixed pair sums below 1");
            Pair { alpha, omega }
        })
        .collect()
}

fn h2() -> RedundancyFunction {
    RedundancyFunction::h_eps(Epsilon::integer(2).unwrap())
}

/// `floor(n + 2 log2 n) = n + floor(log2 n^2)`, in integers.
fn h2_use(n: u64) -> usize {
    (n + 63 - (n * n).leading_zeros() as u64) as usize
}

fn reports(pairs: &[Pair]) -> Vec<CorrectnessReport> {
    pairs
        .iter()
        .map(|p| eventual_correctness(&p.alpha, &p.omega, &h2(), N_MAX, MAX_STAGE).unwrap())
        .collect()
}

fn criterion_1(reports: &[CorrectnessReport]) -> Outcome {
    let mut rows = 0;
    let mut bad = 0;
    for r in reports {
        for row in &r.rows {
            rows += 1;
            if row.trace.oracle_bits_used != h2_use(row.trace.n) {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{} pairs, {rows} traces, {bad} with use != floor(n + 2 log2 n)", reports.len()))
}

fn criterion_2(pairs: &[Pair]) -> Outcome {
    let g = h2();
    let bound: BigRational = (1..=N_MAX)
        .map(|n| BigRational::new(BigInt::from(1), BigInt::from(n * n)))
        .sum();
    let basel_upper = BigRational::new(BigInt::from(16450), BigInt::from(10000));
    let mut worst = DyadicRational::zero();
    let mut bad = 0;
    let mut max_len = 0;
    for p in pairs {
        let test = build_solovay_test(&p.alpha, &p.omega, &g, MAX_STAGE).unwrap();
        // member lengths are floor(n + g(n)), increasing in n
        max_len = test.lengths().into_iter().fold(max_len, usize::max);
        let w = test.weight();
        if w.to_big_rational() > bound {
            bad += 1;
        }
        worst = worst.max(w);
    }
    let pass = bad == 0 && bound < basel_upper && max_len <= h2_use(N_MAX);
    outcome(
        pass,
        format!(
            "max weight {worst} ({:.6}) vs sum_(n<=64) 1/n^2 = {:.6} < 1.6450; longest member {max_len} <= floor(64 + 2 log2 64) = {}; {bad} over",
            worst.to_f64(),
            bound_f64(&bound),
            h2_use(N_MAX),
        ),
    )
}

fn bound_f64(x: &BigRational) -> f64 {
    let scaled = (x * BigRational::from_integer(BigInt::from(1u64 << 52))).to_integer();
    scaled.to_string().parse::<f64>().unwrap() / (1u64 << 52) as f64
}

fn criterion_3(pairs: &[Pair], reports: &[CorrectnessReport]) -> Outcome {
    let mut worst = 0;
    let mut bad = 0;
    for (p, r) in pairs.iter().zip(reports) {
        worst = worst.max(r.threshold);
        if r.threshold > N_MAX {
            bad += 1;
            continue;
        }
        let limit = p.alpha.limit();
        for row in &r.rows {
            if row.trace.n >= r.threshold && row.trace.answer != bit_of(limit, row.trace.n as usize) {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("largest threshold n0 = {worst}; {bad} pairs or rows disagree with the limit bits"))
}

fn criterion_4() -> Outcome {
    let families = 1000;
    let mut bad = 0;
    let mut blocks = 0;
    for seed in 0..families {
        let f = BlockFamily::random(seed, 20);
        blocks += f.blocks().len();
        if exact_miss_measure(&f) != brute_force_miss_measure(&f).unwrap() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{families} families, {blocks} blocks, {bad} mismatches"))
}

fn criterion_5() -> Outcome {
    let rows = marker_table(24).unwrap();
    let bad = rows.iter().filter(|r| !r.holds()).count();
    outcome(bad == 0 && rows.len() == 300, format!("{} (m, k) pairs, {bad} failing", rows.len()))
}

fn criterion_6() -> Outcome {
    let g = RedundancyFunction::log();
    let t = lemma33_partition(100_001).unwrap();
    let at_1e3 = verify_partition(&t, &g, 1000).unwrap();
    let at_1e5 = verify_partition(&t, &g, 100_000).unwrap();
    let separated = at_1e5.k0.is_some();
    let conv_bound = DyadicRational::from_integer(2);
    let conv_ok = at_1e5.conv_partial <= conv_bound;
    let increase = Interval::new(
        at_1e5.div_partial.lo - at_1e3.div_partial.hi,
        at_1e5.div_partial.hi - at_1e3.div_partial.lo,
    );
    let diverging = increase.lo >= 1.0;
    outcome(
        separated && conv_ok && diverging,
        format!(
            "k0 = {:?}; convergent partial sum {} ({:.6}) <= 2: {conv_ok}; divergent increase 1e3 -> 1e5 in {increase} >= 1: {diverging}",
            at_1e5.k0,
            at_1e5.conv_partial,
            at_1e5.conv_partial.to_f64(),
        ),
    )
}

fn criterion_7() -> Outcome {
    let one = DyadicRational::one();
    let weights_ok = (1..=4).all(|j| block_weight(j).unwrap() == one);
    let mut partitions = vec![unit_gap_partition(3).unwrap()];
    for extra in [0, 1, 2, 5] {
        partitions.push(even_partition(3, |j| (block_size(j).unwrap() >> j) + extra).unwrap());
    }
    partitions.push(even_partition(3, |j| block_size(j).unwrap() / 2).unwrap());
    partitions.extend((0..100).map(|seed| random_partition(seed, 3).unwrap()));
    let mut in_d = 0;
    let mut counterexamples = 0;
    for t in &partitions {
        let r = adversary_analyze(t, 3).unwrap();
        in_d += r.blocks.iter().filter(|b| b.in_d).count();
        counterexamples += r.counterexamples();
    }
    outcome(
        weights_ok && counterexamples == 0,
        format!(
            "block weights j <= 4 equal 1: {weights_ok}; {} partitions, {in_d} blocks in D(t), {counterexamples} counterexamples",
            partitions.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let t = lemma33_partition(12).unwrap();
    let r = exhaustive_equivalence(&t, &RedundancyFunction::log(), 1, 16).unwrap();
    let share = r.qualifying_fraction();
    outcome(
        r.counterexamples == 0 && share >= 0.01,
        format!(
            "{} prefixes, {} qualifying ({:.2}%), {} counterexamples",
            r.prefixes,
            r.qualifying,
            share * 100.0,
            r.counterexamples
        ),
    )
}

fn criterion_9() -> Outcome {
    const DEPTH: usize = 18;
    let t = lemma33_partition(12).unwrap();
    let log = RedundancyFunction::log();
    let mut martingales = 0;
    let mut unfair = 0;
    let mut valid = 0;
    let mut missed = 0;
    let mut read_violations = 0;

    // rules unrelated to any instance: a constant guess and a parity guess
    let constant = Martingale::from_prediction_rule(&RuleFn(|_: &BitPrefix| Some(true)), DEPTH).unwrap();
    let parity = Martingale::from_prediction_rule(
        &RuleFn(|s: &BitPrefix| s.len().is_multiple_of(3).then(|| s.count_ones().is_multiple_of(2))),
        DEPTH,
    )
    .unwrap();
    for f in [&constant, &parity] {
        martingales += 1;
        unfair += usize::from(!f.is_fair());
    }

    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut instances = 0;
    while instances < 40 {
        // runs of ones make valid indices common
        let omega = BitPrefix::new((0..DEPTH).map(|_| rng.gen_bool(0.7)).collect());
        let Ok(c) = choose_cutoff(&omega, &t, &log) else { continue };
        let Ok(inst) = build_beta(&omega, &t, &log, c) else { continue };
        instances += 1;
        let rule = PredictorRule::new(&inst, TrueBitsReducer { instance: &inst });
        let f = Martingale::from_prediction_rule(&rule, DEPTH).unwrap();
        martingales += 1;
        unfair += usize::from(!f.is_fair());
        let caps = f.capital_along(&omega).unwrap();
        for k in inst.indices_in_range() {
            if !inst.is_valid(k).unwrap() {
                continue;
            }
            let d = inst.layout()[k - 1].d as usize;
            if d > DEPTH {
                continue;
            }
            valid += 1;
            // caps[j] is the capital after j + 1 bits; the root holds 1
            let before = if d >= 2 { caps[d - 2].clone() } else { DyadicRational::one() };
            if caps[d - 1] != before.mul_u64(2) {
                missed += 1;
            }
        }
        read_violations += rule.violations();
    }
    outcome(
        unfair == 0 && missed == 0 && valid > 0 && read_violations == 0,
        format!(
            "{martingales} martingales, {unfair} unfair; {instances} instances, {valid} valid k, {missed} without doubling, {read_violations} use violations"
        ),
    )
}

fn criterion_10() -> Outcome {
    let harmonic = partial_sum(&RedundancyFunction::log(), 1_000_000).unwrap();
    let harmonic_ok = harmonic.lo >= 14.39;
    let whole = h_eps_series_upper_bound(Epsilon::integer(2).unwrap(), 100_000).unwrap();
    let basel_ok = whole < 1.645;
    let rows = condensation_compare(|n| Summand::Inverse.eval(n), 1 << 20).unwrap();
    let condensed_ok = rows
        .iter()
        .all(|r| r.condensed == Interval::point(f64::from(r.terms)));
    outcome(
        harmonic_ok && basel_ok && condensed_ok,
        format!(
            "sum 2^-h_1 to 1e6 in {harmonic}; sup_N sum 2^-h_2 <= {whole:.12}; condensed = term count on {} rows: {condensed_ok}",
            rows.len()
        ),
    )
}

fn timed(limit_secs: u64, f: impl FnOnce() -> Outcome) -> (Outcome, Duration, bool) {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = took <= Duration::from_secs(limit_secs);
    (o, took, in_time)
}

fn main() {
    let mut failed = Vec::new();
    let mut report = |id: u32, limit: u64, (o, took, in_time): (Outcome, Duration, bool)| {
        let pass = o.pass && in_time;
        println!(
            "criterion {id}: {} ({:.2}s of {limit}s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
        if !pass {
            failed.push(id);
        }
    };

    let start = Instant::now();
    let pairs = corpus();
    let traces = reports(&pairs);
    let shared = start.elapsed();
    let (o, t, _) = timed(30, || criterion_1(&traces));
    let t = t + shared;
    report(1, 30, (o, t, t <= Duration::from_secs(30)));
    report(2, 30, timed(30, || criterion_2(&pairs)));
    let (o, t, _) = timed(60, || criterion_3(&pairs, &traces));
    let t = t + shared;
    report(3, 60, (o, t, t <= Duration::from_secs(60)));
    report(4, 60, timed(60, criterion_4));
    report(5, 120, timed(120, criterion_5));
    report(6, 60, timed(60, criterion_6));
    report(7, 120, timed(120, criterion_7));
    report(8, 120, timed(120, criterion_8));
    report(9, 30, timed(30, criterion_9));
    report(10, 60, timed(60, criterion_10));

    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
