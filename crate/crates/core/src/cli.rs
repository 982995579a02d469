//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification or simulation fails,
//! 2 on bad arguments or input files. Every random choice derives from
//! `--seed` (or `CACHEKIT_SEED`), defaulting to [`DEFAULT_SEED`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{ToPrimitive, Zero};
use rand::RngCore;
use rayon::prelude::*;

use crate::centralized::{self, select_leaders};
use crate::combinatorics::{choose, enumerate_subsets, rational_int, to_f64, Rational};
use crate::decentralized;
use crate::error::{Error, Result};
use crate::model::{demand_stats, enumerate_types, parse_rational, seeded_rng, Database, Demand, DemandStats, Placement, UserCache};
use crate::rate_analysis::{
    self, converse_bound, curves_to_csv, curves_to_table, distinct_rate, format_decimal, parse_grid, rate_curve,
    CacheProfile, Scheme,
};

pub const DEFAULT_SEED: u64 = 42;

/// Largest `N^K` that `verify` and `bound` will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "cachekit", version, about = "Coded caching with uncoded prefetching")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate-memory curves as long-format CSV (`M,R,scheme,N,K`).
    Rates(CurveArgs),
    /// Run the centralized scheme on every demand and check decoding,
    /// message counts and the message identity.
    Verify(VerifyArgs),
    /// One placement and one demand, end to end.
    Simulate(SimulateArgs),
    /// Converse bound per demand type for a placement file.
    Bound(BoundArgs),
    /// Schemes side by side, one column each.
    Compare(CurveArgs),
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long = "n")]
    pub files: usize,
    #[arg(long = "k")]
    pub users: usize,
    /// `start:stop:step`; defaults to `0:N:1`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Comma-separated scheme labels.
    #[arg(long)]
    pub schemes: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    #[arg(long = "n")]
    pub files: usize,
    #[arg(long = "k")]
    pub users: usize,
    /// Cache size in files (`2`, `3/2`, `0.5`).
    #[arg(long = "m")]
    pub memory: Option<String>,
    /// `t = K M / N`.
    #[arg(long)]
    pub t: Option<usize>,
    /// Bits per file.
    #[arg(long = "f")]
    pub file_bits: Option<usize>,
    #[arg(long, env = "CACHEKIT_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Centralized,
    Decentralized,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub cache: CacheArgs,
    #[arg(long, value_enum, default_value_t = Mode::Centralized)]
    pub mode: Mode,
    /// Requested file per user, e.g. `1,1,2,2,3,3`; random when absent.
    #[arg(long)]
    pub demand: Option<String>,
    /// Write the transcript to a path, or to stdout when given no value.
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    pub dump: Option<String>,
    /// Save the placement in the text format `bound` reads.
    #[arg(long)]
    pub placement_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub placement: PathBuf,
    /// Slack `eps` of the bound.
    #[arg(long, default_value = "0")]
    pub eps: String,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&config, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Contract(_) | Error::MissingMessage { .. } => 1,
        _ => 2,
    }
}

pub fn dispatch(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    match &config.command {
        Command::Rates(a) => cmd_rates(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::Compare(a) => cmd_compare(a, out),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn check_sizes(files: usize, users: usize) -> Result<()> {
    if files == 0 || users == 0 {
        return Err(usage("--n and --k must be positive"));
    }
    if users > crate::combinatorics::MAX_USERS {
        return Err(usage(format!("--k must be at most {}", crate::combinatorics::MAX_USERS)));
    }
    Ok(())
}

fn curves(a: &CurveArgs, default: &[Scheme]) -> Result<Vec<rate_analysis::RateCurve>> {
    check_sizes(a.files, a.users)?;
    let grid = parse_grid(a.grid.as_deref().unwrap_or(&format!("0:{}:1", a.files)))?;
    if grid.last().is_some_and(|m| *m > rational_int(a.files as u64)) || grid[0] < Rational::zero() {
        return Err(usage(format!("grid must lie within [0, {}]", a.files)));
    }
    let schemes: Vec<Scheme> = match &a.schemes {
        None => default.to_vec(),
        Some(s) => s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect::<Result<_>>()?,
    };
    if schemes.is_empty() {
        return Err(usage("--schemes lists no scheme"));
    }
    schemes
        .par_iter()
        .map(|&s| rate_curve(s, a.files, a.users, &grid))
        .collect()
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str, rows: usize) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, text)?;
            writeln!(out, "wrote {rows} rows to {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_rates(a: &CurveArgs, out: &mut dyn Write) -> Result<i32> {
    let curves = curves(a, &[Scheme::OptimalAvg])?;
    let csv = curves_to_csv(&curves)?;
    emit(out, a.out.as_ref(), &csv, csv.lines().count() - 1)?;
    Ok(0)
}

pub fn cmd_compare(a: &CurveArgs, out: &mut dyn Write) -> Result<i32> {
    let curves = curves(a, &Scheme::ALL)?;
    let table = curves_to_table(&curves)?;
    emit(out, a.out.as_ref(), &table, table.lines().count() - 1)?;
    Ok(0)
}

/// Resolves `t` from `--t` or `--m`; `M` must put `t` on an integer.
fn integer_t(c: &CacheArgs) -> Result<usize> {
    check_sizes(c.files, c.users)?;
    let from_m = match &c.memory {
        Some(m) => {
            let m = memory_of(c, m)?;
            let t = rate_analysis::cache_parameter(c.files, c.users, &m);
            if !t.is_integer() {
                return Err(usage(format!("M = {m} gives t = K M / N = {t}, not an integer")));
            }
            Some(t.to_integer().to_usize().expect("t <= K"))
        }
        None => None,
    };
    let t = match (c.t, from_m) {
        (Some(t), Some(tm)) if t != tm => return Err(usage(format!("--t {t} disagrees with --m (t = {tm})"))),
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(usage("give --t or --m")),
    };
    if t > c.users {
        return Err(usage(format!("--t must be at most K = {}", c.users)));
    }
    Ok(t)
}

fn memory_of(c: &CacheArgs, text: &str) -> Result<Rational> {
    let m = parse_rational(text).ok_or_else(|| usage(format!("bad --m `{text}`")))?;
    if m < Rational::zero() || m > rational_int(c.files as u64) {
        return Err(usage(format!("--m must lie within [0, {}]", c.files)));
    }
    Ok(m)
}

fn batch_file_bits(c: &CacheArgs, t: usize) -> Result<usize> {
    let sub = choose(c.users, t) as usize;
    let f = c.file_bits.unwrap_or(sub);
    if f == 0 || !f.is_multiple_of(sub) {
        return Err(usage(format!("--f must be a positive multiple of C(K,t) = {sub}")));
    }
    Ok(f)
}

fn demand_count(files: usize, users: usize) -> Option<u128> {
    (files as u128).checked_pow(users as u32).filter(|&n| n <= EXHAUSTIVE_LIMIT)
}

/// Demand number `index` in [`Demand::all`] order.
fn demand_at(files: usize, users: usize, mut index: u128) -> Demand {
    let mut requests = vec![0; users];
    for r in requests.iter_mut().rev() {
        *r = (index % files as u128) as usize + 1;
        index /= files as u128;
    }
    Demand::new(requests, files).expect("digits are valid files")
}

fn join(requests: &[usize]) -> String {
    requests.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

struct Checked {
    n_e: usize,
    messages: usize,
    lemma_checks: usize,
    failure: Option<String>,
}

fn verify_one(db: &Database, placement: &Placement, caches: &[UserCache], d: &Demand, t: usize) -> Result<Checked> {
    let users = d.users();
    let n_e = d.distinct();
    let messages = centralized::encode_delivery(db, placement, d)?;
    let expected = (choose(users, t + 1) - choose(users - n_e, t + 1)) as usize;
    let mut checked = Checked { n_e, messages: messages.len(), lemma_checks: 0, failure: None };
    if messages.len() != expected {
        checked.failure = Some(format!("{} messages, expected {expected}", messages.len()));
        return Ok(checked);
    }
    let decoded = match centralized::decode_all_cached(placement, caches, &messages, d) {
        Ok(files) => files,
        Err(e) => {
            checked.failure = Some(e.to_string());
            return Ok(checked);
        }
    };
    if let Some(k) = (1..=users).find(|&k| decoded[k - 1].as_bitslice() != db.file(d.file_of(k))) {
        checked.failure = Some(format!("user {k} decoded a wrong file"));
        return Ok(checked);
    }
    let leaders = select_leaders(d);
    if t < users {
        let free: Vec<_> = enumerate_subsets(users, t + 1)?
            .into_iter()
            .filter(|a| a.mask() & leaders.mask() == 0)
            .collect();
        for a in [free.first(), free.last()].into_iter().flatten() {
            let b = crate::combinatorics::SubsetId::from_mask(users, a.mask() | leaders.mask());
            checked.lemma_checks += 1;
            if !centralized::verify_lemma1(db, placement, d, &leaders, &b)? {
                checked.failure = Some(format!("message identity fails on {b}"));
                return Ok(checked);
            }
        }
    }
    Ok(checked)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.cache;
    let t = integer_t(c)?;
    let f = batch_file_bits(c, t)?;
    let total = demand_count(c.files, c.users).ok_or_else(|| {
        usage(format!(
            "N^K = {}^{} exceeds {EXHAUSTIVE_LIMIT} demands; verify enumerates every demand",
            c.files, c.users
        ))
    })?;
    let placement = centralized::batch_placement(c.files, c.users, t, f)?;
    let db = Database::generate(c.files, f, c.seed);
    writeln!(out, "verify N={} K={} t={t} F={f} seed={}", c.files, c.users, c.seed)?;

    let caches: Vec<UserCache> = (1..=c.users).map(|k| placement.cache_of(&db, k)).collect();
    let results: Vec<Checked> = (0..total)
        .into_par_iter()
        .map(|i| verify_one(&db, &placement, &caches, &demand_at(c.files, c.users, i), t))
        .collect::<Result<_>>()?;

    let mut by_ne: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut lemma = 0;
    for r in &results {
        let e = by_ne.entry(r.n_e).or_insert((r.messages, 0));
        e.1 += 1;
        lemma += r.lemma_checks;
    }
    writeln!(out, "demands: {total}")?;
    for (n_e, (msgs, count)) in &by_ne {
        writeln!(out, "N_e = {n_e}: {count} demands, {msgs} messages each, rate {}", distinct_rate(c.users, *n_e, t))?;
    }
    writeln!(out, "message identity checks: {lemma}")?;
    if let Some((i, r)) = results.iter().enumerate().find(|(_, r)| r.failure.is_some()) {
        let d = demand_at(c.files, c.users, i as u128);
        writeln!(out, "FAIL demand {}: {}", join(d.requests()), r.failure.as_deref().unwrap_or_default())?;
        return Ok(1);
    }
    writeln!(out, "PASS")?;
    Ok(0)
}

fn parse_demand(text: &str, files: usize, users: usize) -> Result<Demand> {
    let requests: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| usage(format!("bad --demand entry `{s}`"))))
        .collect::<Result<_>>()?;
    if requests.len() != users {
        return Err(usage(format!("--demand lists {} users, expected K = {users}", requests.len())));
    }
    Demand::new(requests, files).map_err(|e| usage(e.to_string()))
}

fn fmt_rate(r: &Rational) -> String {
    format!("{r} ({})", format_decimal(r, 6))
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.cache;
    check_sizes(c.files, c.users)?;
    let mut rng = seeded_rng(c.seed);
    let db_seed = rng.next_u64();
    let placement_seed = rng.next_u64();
    let d = match &a.demand {
        Some(text) => parse_demand(text, c.files, c.users)?,
        None => Demand::random(c.files, c.users, &mut rng),
    };
    let n_e = d.distinct();

    let (placement, messages, decoded, predicted) = match a.mode {
        Mode::Centralized => {
            let t = integer_t(c)?;
            let f = batch_file_bits(c, t)?;
            let db = Database::generate(c.files, f, db_seed);
            let placement = centralized::batch_placement(c.files, c.users, t, f)?;
            writeln!(out, "centralized N={} K={} M={} t={t} F={f} seed={}", c.files, c.users, placement.memory(), c.seed)?;
            let messages = centralized::encode_delivery(&db, &placement, &d)?;
            let decoded = check_decoded(&db, &d, centralized::decode_all(&db, &placement, &messages, &d));
            (placement, messages, decoded, distinct_rate(c.users, n_e, t))
        }
        Mode::Decentralized => {
            let m = match (&c.memory, c.t) {
                (Some(m), _) => memory_of(c, m)?,
                (None, Some(t)) if t <= c.users => rational_int((c.files * t) as u64) / rational_int(c.users as u64),
                _ => return Err(usage("give --m (or --t <= K)")),
            };
            let f = c.file_bits.unwrap_or(10_000);
            if f == 0 {
                return Err(usage("--f must be positive"));
            }
            let db = Database::generate(c.files, f, db_seed);
            let placement = decentralized::random_placement(c.files, c.users, &m, f, placement_seed)?;
            writeln!(out, "decentralized N={} K={} M={m} F={f} seed={}", c.files, c.users, c.seed)?;
            let partition = decentralized::level_partition(&placement);
            let messages = decentralized::encode_delivery_decentralized(&db, &partition, &d)?;
            let decoded = check_decoded(
                &db,
                &d,
                decentralized::decode_all_decentralized(&db, &placement, &partition, &messages, &d),
            );
            writeln!(out, "padding bits: {}", decentralized::padding_bits(&partition, &d)?)?;
            (placement, messages, decoded, rate_analysis::dec_rate_for(c.files, &m, n_e)?)
        }
    };

    let measured = centralized::delivered_rate(&messages, placement.file_bits());
    let bits: usize = messages.iter().map(|m| m.payload.len()).sum();
    writeln!(out, "demand {} (N_e = {n_e})", join(d.requests()))?;
    writeln!(out, "messages: {}, transmitted bits: {bits}", messages.len())?;
    writeln!(out, "rate measured:  {}", fmt_rate(&measured))?;
    writeln!(out, "rate predicted: {}", fmt_rate(&predicted))?;
    if !predicted.is_zero() {
        let rel = (to_f64(&measured) - to_f64(&predicted)).abs() / to_f64(&predicted);
        writeln!(out, "relative error: {rel:.6}")?;
    }
    if let Some(path) = &a.placement_out {
        fs::write(path, placement.to_text())?;
        writeln!(out, "placement written to {}", path.display())?;
    }
    if let Some(dest) = &a.dump {
        let text = centralized::transcript(&messages);
        if dest == "-" {
            out.write_all(text.as_bytes())?;
        } else {
            fs::write(dest, text)?;
            writeln!(out, "transcript written to {dest}")?;
        }
    }
    match decoded {
        Ok(()) => {
            writeln!(out, "decode OK")?;
            Ok(0)
        }
        Err(why) => {
            writeln!(out, "decode FAILED: {why}")?;
            Ok(1)
        }
    }
}

fn check_decoded(db: &Database, d: &Demand, decoded: Result<Vec<crate::bits::Bits>>) -> std::result::Result<(), String> {
    let files = decoded.map_err(|e| e.to_string())?;
    let wrong: Vec<String> = files
        .iter()
        .enumerate()
        .filter(|(i, w)| w.as_bitslice() != db.file(d.file_of(i + 1)))
        .map(|(i, w)| {
            let want = db.file(d.file_of(i + 1));
            let diff = w.iter().by_vals().zip(want.iter().by_vals()).filter(|(a, b)| a != b).count();
            format!("user {} ({diff} bits differ)", i + 1)
        })
        .collect();
    if wrong.is_empty() {
        Ok(())
    } else {
        Err(wrong.join(", "))
    }
}

/// Type-averaged rate of the level-partitioned scheme on `placement`, by
/// enumerating every demand.
pub fn achieved_by_type(placement: &Placement) -> Result<Option<BTreeMap<DemandStats, Rational>>> {
    let (files, users) = (placement.files(), placement.users());
    let Some(total) = demand_count(files, users) else {
        return Ok(None);
    };
    let partition = decentralized::level_partition(placement);
    let per_demand: Vec<(DemandStats, usize)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let d = demand_at(files, users, i);
            Ok((demand_stats(&d), decentralized::delivery_bits(&partition, &d)?))
        })
        .collect::<Result<_>>()?;
    let mut sums: BTreeMap<DemandStats, (usize, usize)> = BTreeMap::new();
    for (s, bits) in per_demand {
        let e = sums.entry(s).or_default();
        e.0 += bits;
        e.1 += 1;
    }
    Ok(Some(
        sums.into_iter()
            .map(|(s, (bits, n))| (s, rational_int(bits as u64) / rational_int((n * placement.file_bits()) as u64)))
            .collect(),
    ))
}

pub fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.placement)?;
    // a placement that breaks its own budget is bad input, not a failed check
    let placement = Placement::parse(&text).map_err(|e| match e {
        Error::Contract(msg) => Error::Parse { line: 1, msg },
        e => e,
    })?;
    let eps = parse_rational(&a.eps)
        .filter(|e| *e >= Rational::zero())
        .ok_or_else(|| usage(format!("bad --eps `{}`", a.eps)))?;
    let (files, users) = (placement.files(), placement.users());
    let profile = CacheProfile::from_placement(&placement);
    let structure = match placement.batch_view() {
        Some(v) => format!("batch t={}", v.t),
        None => "unstructured".to_string(),
    };
    writeln!(
        out,
        "placement K={users} N={files} F={} M={} ({structure})",
        placement.file_bits(),
        placement.memory()
    )?;
    let profile_text: Vec<String> = profile.counts().iter().enumerate().map(|(n, c)| format!("{n}:{c}")).collect();
    writeln!(out, "a_n: {}", profile_text.join(" "))?;

    let achieved = match placement.batch_view() {
        Some(v) => Some(
            enumerate_types(files, users)
                .into_iter()
                .map(|s| {
                    let r = distinct_rate(users, s.n_e(), v.t);
                    (s, r)
                })
                .collect::<BTreeMap<_, _>>(),
        ),
        None => achieved_by_type(&placement)?,
    };
    writeln!(out, "{:<24} {:>4} {:>12} {:>12}", "type", "N_e", "bound", "achieved")?;
    for s in enumerate_types(files, users) {
        let bound = converse_bound(&profile, &s, &eps)?;
        let got = achieved
            .as_ref()
            .and_then(|m| m.get(&s))
            .map_or_else(|| "-".to_string(), |r| format_decimal(r, 6));
        let label = format!("({})", join(s.counts()));
        writeln!(out, "{label:<24} {:>4} {:>12} {got:>12}", s.n_e(), format_decimal(&bound, 6))?;
    }
    Ok(0)
}
