//! The `omega-lab` batch driver.
//!
//! Every subcommand writes its primary report to `--out` (stdout when
//! absent). Exit codes: 0 success, 1 invariant violation (a JSON record goes
//! to stderr), 2 usage or input error, 3 epsilon below 1.
//!
//! `--config FILE` reads `key = value` lines; each becomes `--key value`
//! after the command-line flags, so the file wins. All randomness comes from
//! `--seed` through ChaCha8.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::beta::{
    build_beta, choose_cutoff, derived_predictor, exhaustive_equivalence, BetaError,
    TrueBitsReducer,
};
use crate::bitreal::{prefix_of, BitPrefix, DyadicRational};
use crate::machine::{as_left_ce, sum_left_ce, GeneratorConfig, MachineTable};
use crate::randomness::{
    brute_force_miss_measure, exact_miss_measure, product_sum_report, BlockFamily,
};
use crate::reduction::{build_solovay_test, eventual_correctness, write_trace_csv};
use crate::report::{write_json, Csv};
use crate::series::adversary::{even_partition, random_partition, unit_gap_partition};
use crate::series::convergence::partial_sums_at;
use crate::series::markers::marker_table;
use crate::series::partition::partition_rows;
use crate::series::adversary::block_size;
use crate::series::{
    adversary_analyze, condensation_compare, lemma33_partition,
    verify_partition, Epsilon, PartitionSequence, RedundancyFunction, SeriesError, Summand,
};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "OMEGA_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "omega-lab", version, about = "Redundancy, Solovay tests and omega numbers at desk scale")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file; its values override flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every generated object.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduction traces and Solovay-test weight for a pair of machines.
    Reduce(ReduceArgs),
    /// Partition table and its separation and sum conditions.
    Partition(PartitionArgs),
    /// Blocks of the adversarial redundancy function against a partition.
    Adversary(AdversaryArgs),
    /// Marker minimization: closed form, brute force and lower bounds.
    Markers(MarkersArgs),
    /// Miss measures of block families, or product and sum side by side.
    Measure(MeasureArgs),
    /// The diagonal construction and its prediction equivalence.
    Beta(BetaArgs),
    /// Partial sums of 2^-g(n) and condensation comparisons.
    Series(SeriesArgs),
}

#[derive(Debug, Args)]
pub struct GArgs {
    /// log, h_eps, h_star, adversarial or table.
    #[arg(long, default_value = "log")]
    pub g: String,
    /// Parameter of h_eps and h_star: an integer, p/q or a decimal.
    #[arg(long, default_value = "1")]
    pub eps: String,
    /// Values g(1), g(2), ... for `--g table`, whitespace separated.
    #[arg(long)]
    pub g_table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Machine table for alpha.
    #[arg(long)]
    pub u: Option<PathBuf>,
    /// Machine table added to alpha to form Omega.
    #[arg(long)]
    pub v: Option<PathBuf>,
    #[command(flatten)]
    pub g: GArgs,
    #[arg(long, default_value_t = 64)]
    pub n_max: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_stage: u64,
    /// Trace CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// lemma33 or a file of positions.
    #[arg(long, default_value = "lemma33")]
    pub t: String,
    #[command(flatten)]
    pub g: GArgs,
    #[arg(long, default_value_t = 1000)]
    pub k_max: usize,
    /// Partition CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    /// unit-gaps, even, random or a file of positions.
    #[arg(long, default_value = "unit-gaps")]
    pub t: String,
    #[arg(long, default_value_t = 3)]
    pub jmax: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MarkersArgs {
    #[arg(long, default_value_t = 24)]
    pub m_max: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Block family file, `positions ; bits` per line.
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    /// Number of random families when no file is given.
    #[arg(long, default_value_t = 100)]
    pub families: u64,
    #[arg(long, default_value_t = 20)]
    pub max_position: usize,
    /// Instead: product and sum for b_i = i, 2i or 1.
    #[arg(long)]
    pub product: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub terms: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    /// Check every prefix of the given length.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 16)]
    pub length: usize,
    /// lemma33 or a file of positions.
    #[arg(long, default_value = "lemma33")]
    pub t: String,
    #[command(flatten)]
    pub g: GArgs,
    /// Cutoff c; chosen from the prefix when absent (exhaustive: one below
    /// the partition range).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Omega prefix as a bit string.
    #[arg(long)]
    pub omega: Option<String>,
    /// Omega as the halting probability of a machine table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub g: GArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: u64,
    /// Condensation comparison for inverse, geometric or constant.
    #[arg(long)]
    pub condense: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Epsilon(String),
    Violation(serde_json::Value),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Epsilon(_) => 3,
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::EpsilonBelowOne(_) => CliError::Epsilon("epsilon below 1 unsupported".into()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn violation(subcommand: &str, what: &str, detail: impl Serialize) -> CliError {
    CliError::Violation(json!({
        "subcommand": subcommand,
        "violation": what,
        "detail": detail,
    }))
}

/// Parse arguments (with `--config` expansion), run, and return the exit
/// code. Diagnostics go to `err`.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {}", describe(&e));
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    configure_threads();
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", describe(&e));
            e.exit_code()
        }
    }
}

fn describe(e: &CliError) -> String {
    match e {
        CliError::Usage(m) => format!("error: {m}"),
        CliError::Epsilon(m) => format!("error: {m}"),
        CliError::Violation(v) => v.to_string(),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Append `--key value` for each `key = value` line of the `--config` file.
fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let pos = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let path = match args[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(args.get(pos + 1).ok_or_else(|| usage("--config needs a file"))?),
    };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Reduce(a) => cmd_reduce(a, cli.seed, stdout),
        Command::Partition(a) => cmd_partition(a, stdout),
        Command::Adversary(a) => cmd_adversary(a, cli.seed, stdout),
        Command::Markers(a) => cmd_markers(a, stdout),
        Command::Measure(a) => cmd_measure(a, cli.seed, stdout),
        Command::Beta(a) => cmd_beta(a, cli.seed, stdout),
        Command::Series(a) => cmd_series(a, stdout),
    }
}

/// Run `f` against the `--out` file, or stdout.
fn with_out(
    path: &Option<PathBuf>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut file = io::BufWriter::new(
                fs::File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
            );
            f(&mut file)?;
            file.flush()?;
        }
        None => f(stdout)?,
    }
    Ok(())
}

fn read_file(p: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

pub fn parse_g(a: &GArgs) -> Result<RedundancyFunction, CliError> {
    let eps = || a.eps.parse::<Epsilon>();
    Ok(match a.g.as_str() {
        "log" => RedundancyFunction::log(),
        "h_eps" | "h-eps" => RedundancyFunction::h_eps(eps()?),
        "h_star" | "h-star" => RedundancyFunction::h_star(eps()?),
        "adversarial" => RedundancyFunction::Adversarial,
        "table" => {
            let p = a.g_table.as_ref().ok_or_else(|| usage("--g table needs --g-table"))?;
            let values = read_file(p)?
                .split_whitespace()
                .map(|v| v.parse::<DyadicRational>().map_err(usage))
                .collect::<Result<Vec<_>, _>>()?;
            RedundancyFunction::table(values)?
        }
        other => return Err(usage(format!("unknown redundancy function {other:?}"))),
    })
}

fn load_machine(p: &PathBuf) -> Result<MachineTable, CliError> {
    read_file(p)?
        .parse::<MachineTable>()
        .map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn read_positions(p: &str) -> Result<PartitionSequence, CliError> {
    let positions = read_file(&PathBuf::from(p))?
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|_| usage(format!("{p}: bad position {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PartitionSequence::user(positions)?)
}

#[derive(Serialize)]
struct ReduceSummary {
    g: String,
    n_max: u64,
    threshold: u64,
    max_use: usize,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    test_weight: DyadicRational,
    test_size: usize,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    alpha: DyadicRational,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    omega: DyadicRational,
}

fn cmd_reduce(a: &ReduceArgs, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = parse_g(&a.g)?;
    let (u, v) = match (&a.u, &a.v) {
        (Some(u), Some(v)) => (load_machine(u)?, load_machine(v)?),
        (None, None) => MachineTable::random_pair(seed, &GeneratorConfig::default()),
        _ => return Err(usage("give both --u and --v, or neither")),
    };
    let alpha = as_left_ce(&u);
    let omega = sum_left_ce(&alpha, &as_left_ce(&v)).map_err(usage)?;
    let report = eventual_correctness(&alpha, &omega, &g, a.n_max, a.max_stage).map_err(usage)?;
    let test = build_solovay_test(&alpha, &omega, &g, a.max_stage).map_err(usage)?;
    with_out(&a.out, stdout, |w| write_trace_csv(w, &report.rows))?;
    for r in &report.rows {
        let bound = g.floor_eval(r.trace.n)? as usize;
        if r.trace.oracle_bits_used != bound {
            return Err(violation("reduce", "use bound", &r.trace));
        }
    }
    // the weight bound needs sum_{n <= N} 2^-g(n) exactly; it is checked
    // against the certified upper end of the partial sum
    let weight = test.weight();
    let bound = crate::series::partial_sum(&g, a.n_max.max(1))?.hi;
    if weight.to_f64() > bound {
        return Err(violation("reduce", "Solovay weight bound", weight.to_string()));
    }
    let summary = ReduceSummary {
        g: g.name(),
        n_max: a.n_max,
        threshold: report.threshold,
        max_use: report.rows.iter().map(|r| r.trace.oracle_bits_used).max().unwrap_or(0),
        test_weight: weight,
        test_size: test.len(),
        alpha: alpha.limit().clone(),
        omega: omega.limit().clone(),
    };
    if let Some(p) = &a.summary {
        with_out(&Some(p.clone()), stdout, |w| write_json(w, &summary))?;
    }
    Ok(())
}

fn cmd_partition(a: &PartitionArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = parse_g(&a.g)?;
    let t = match a.t.as_str() {
        "lemma33" => lemma33_partition(a.k_max + 1)?,
        path => read_positions(path)?,
    };
    let report = verify_partition(&t, &g, a.k_max)?;
    let rows = partition_rows(&t, &g)?;
    with_out(&a.out, stdout, |w| {
        let mut csv = Csv::new(w, &["i", "t", "g", "use", "gap"])?;
        for r in &rows {
            csv.row(&[
                r.i.to_string(),
                r.t.to_string(),
                r.g.clone(),
                r.use_bound.to_string(),
                r.gap.to_string(),
            ])?;
        }
        Ok(())
    })?;
    if let Some(p) = &a.summary {
        with_out(&Some(p.clone()), stdout, |w| write_json(w, &report))?;
    }
    if report.k0.is_none() {
        return Err(violation("partition", "separation fails at K", &report));
    }
    Ok(())
}

fn cmd_adversary(a: &AdversaryArgs, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let t = match a.t.as_str() {
        "unit-gaps" => unit_gap_partition(a.jmax)?,
        "even" => even_partition(a.jmax, |j| block_size(j).map_or(0, |len| (len >> j) + 1))?,
        "random" => random_partition(seed, a.jmax)?,
        path => read_positions(path)?,
    };
    let report = adversary_analyze(&t, a.jmax)?;
    with_out(&a.out, stdout, |w| write_json(w, &report))?;
    if report.counterexamples() > 0 {
        return Err(violation("adversary", "block in D(t) with sum below 1/4", &report));
    }
    Ok(())
}

fn cmd_markers(a: &MarkersArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = marker_table(a.m_max)?;
    with_out(&a.out, stdout, |w| {
        let mut csv = Csv::new(w, &["m", "k", "closed_form", "brute_force", "bound1", "bound2"])?;
        for r in &rows {
            csv.row(&[
                r.m.to_string(),
                r.k.to_string(),
                r.closed_form.to_string(),
                r.brute_force.to_string(),
                r.bound1.to_string(),
                r.bound2.to_string(),
            ])?;
        }
        Ok(())
    })?;
    if let Some(r) = rows.iter().find(|r| !r.holds()) {
        return Err(violation("markers", "closed form, brute force and bounds disagree", r));
    }
    Ok(())
}

#[derive(Serialize)]
struct MeasureRow {
    family: u64,
    blocks: usize,
    max_position: usize,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    exact: DyadicRational,
    #[serde(serialize_with = "crate::report::ser_dyadic")]
    brute_force: DyadicRational,
}

fn cmd_measure(a: &MeasureArgs, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Some(kind) = &a.product {
        let b: Vec<u64> = match kind.as_str() {
            "i" => (1..=a.terms).collect(),
            "2i" => (1..=a.terms).map(|i| 2 * i).collect(),
            "1" => vec![1; a.terms as usize],
            other => return Err(usage(format!("unknown product sequence {other:?}"))),
        };
        let rows = product_sum_report(&b);
        return with_out(&a.out, stdout, |w| {
            let mut csv = Csv::new(w, &["i", "b", "product", "sum"])?;
            for r in &rows {
                csv.row(&[r.i.to_string(), r.b.to_string(), r.product.to_string(), r.sum.to_string()])?;
            }
            Ok(())
        });
    }
    let families: Vec<BlockFamily> = match &a.blocks {
        Some(p) => vec![read_file(p)?
            .parse()
            .map_err(|e| usage(format!("{}: {e}", p.display())))?],
        None => (0..a.families)
            .map(|i| BlockFamily::random(seed.wrapping_add(i), a.max_position))
            .collect(),
    };
    let rows = families
        .iter()
        .zip(0..)
        .map(|(f, i)| {
            Ok(MeasureRow {
                family: i,
                blocks: f.blocks().len(),
                max_position: f.max_position(),
                exact: exact_miss_measure(f),
                brute_force: brute_force_miss_measure(f).map_err(usage)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    with_out(&a.out, stdout, |w| {
        let mut csv = Csv::new(w, &["family", "blocks", "max_position", "exact", "brute_force"])?;
        for r in &rows {
            csv.row(&[
                r.family.to_string(),
                r.blocks.to_string(),
                r.max_position.to_string(),
                r.exact.to_string(),
                r.brute_force.to_string(),
            ])?;
        }
        Ok(())
    })?;
    if let Some(r) = rows.iter().find(|r| r.exact != r.brute_force) {
        return Err(violation("measure", "product formula disagrees with enumeration", r));
    }
    Ok(())
}

/// Terms of the lemma33 partition until `t_k` passes `len`, plus one.
fn partition_for(t: &str, len: usize) -> Result<PartitionSequence, CliError> {
    if t != "lemma33" {
        return read_positions(t);
    }
    let mut k = 8;
    loop {
        let p = lemma33_partition(k)?;
        if p.positions().last().is_some_and(|&x| x > len as u64 + 1) {
            return Ok(p);
        }
        k *= 2;
    }
}

#[derive(Serialize)]
struct IndexOutcome {
    k: usize,
    valid: bool,
    conditions_hold: bool,
    equivalence_holds: Option<bool>,
    predicted: Option<bool>,
    actual: bool,
}

fn cmd_beta(a: &BetaArgs, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let g = parse_g(&a.g)?;
    let t = partition_for(&a.t, a.length)?;
    let beta_err = |e: BetaError| usage(e);
    if a.exhaustive {
        let c = match a.cutoff {
            Some(c) => c,
            None => t.first_positive_index().unwrap_or(1) - 1,
        };
        let r = exhaustive_equivalence(&t, &g, c, a.length).map_err(beta_err)?;
        writeln!(stdout, "counterexamples: {}", r.counterexamples)?;
        writeln!(stdout, "qualifying: {}/{}", r.qualifying, r.prefixes)?;
        if let Some(p) = &a.out {
            with_out(&Some(p.clone()), stdout, |w| write_json(w, &r))?;
        }
        if r.counterexamples > 0 {
            return Err(violation("beta", "prediction equivalence fails", &r));
        }
        return Ok(());
    }
    let omega = match (&a.omega, &a.table) {
        (Some(bits), None) => bits.parse::<BitPrefix>().map_err(usage)?,
        (None, Some(p)) => {
            let m = load_machine(p)?;
            prefix_of(&m.kraft_sum(), a.length).map_err(usage)?
        }
        (None, None) => {
            use rand::Rng;
            use rand_chacha::rand_core::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            BitPrefix::new((0..a.length).map(|_| rng.gen_bool(0.5)).collect())
        }
        _ => return Err(usage("give at most one of --omega and --table")),
    };
    let c = match a.cutoff {
        Some(c) => c,
        None => choose_cutoff(&omega, &t, &g).map_err(beta_err)?,
    };
    let inst = build_beta(&omega, &t, &g, c).map_err(beta_err)?;
    let mut outcomes = Vec::new();
    for k in inst.indices_in_range() {
        let v = inst.check_equivalence(k).map_err(beta_err)?;
        let predicted = if v.valid {
            derived_predictor(&inst, &TrueBitsReducer { instance: &inst }, k).ok()
        } else {
            None
        };
        let l = &inst.layout()[k - 1];
        debug_assert_eq!(l.k, k);
        outcomes.push(IndexOutcome {
            k,
            valid: v.valid,
            conditions_hold: v.conditions_hold,
            equivalence_holds: v.equivalence_holds,
            predicted,
            actual: omega.bits()[l.d as usize - 1],
        });
    }
    let report = json!({ "instance": inst.report(), "indices": outcomes });
    with_out(&a.out, stdout, |w| write_json(w, &report))?;
    if outcomes.iter().any(|o| o.equivalence_holds == Some(false)) {
        return Err(violation("beta", "prediction equivalence fails", &report));
    }
    Ok(())
}

fn cmd_series(a: &SeriesArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Some(kind) = &a.condense {
        let f: Summand = kind.parse()?;
        let rows = condensation_compare(|n| f.eval(n), a.n_max)?;
        return with_out(&a.out, stdout, |w| {
            let mut csv = Csv::new(w, &["k", "terms", "direct", "condensed"])?;
            for r in &rows {
                csv.row(&[r.k.to_string(), r.terms.to_string(), r.direct.to_string(), r.condensed.to_string()])?;
            }
            Ok(())
        });
    }
    let g = parse_g(&a.g)?;
    let mut checkpoints: Vec<u64> = std::iter::successors(Some(1u64), |&n| n.checked_mul(10))
        .take_while(|&n| n < a.n_max)
        .collect();
    checkpoints.push(a.n_max);
    let sums = partial_sums_at(&g, &checkpoints)?;
    with_out(&a.out, stdout, |w| {
        let mut csv = Csv::new(w, &["n", "partial_sum"])?;
        for (n, s) in &sums {
            csv.row(&[n.to_string(), s.to_string()])?;
        }
        Ok(())
    })
}
