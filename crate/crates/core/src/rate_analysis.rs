//! Exact rate-memory tradeoffs, the prior-art baselines, and the converse
//! bound for arbitrary uncoded placements.
//!
//! Centralized formulas are evaluated at `t = K M / N`: directly when `t` is
//! an integer, otherwise on the lower convex envelope of the integer points.
//! Expectations over uniform demands go through [`ne_distribution`], so all
//! results are exact rationals except the memory-shared decentralized
//! baseline, which needs a tangent search and is returned as `f64`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::combinatorics::{choose, lower_convex_envelope, rational_int, to_f64, EnvelopePoints, Rational};
use crate::error::{Error, Result};
use crate::model::{ne_distribution, DemandStats, NeDistribution, Placement};

fn check_memory(files: usize, users: usize, memory: &Rational) -> Result<()> {
    if files == 0 || users == 0 {
        return Err(Error::Domain("N and K must be positive".into()));
    }
    if users > crate::combinatorics::MAX_USERS {
        return Err(Error::Domain(format!("K = {users} exceeds {}", crate::combinatorics::MAX_USERS)));
    }
    if *memory < Rational::zero() || *memory > rational_int(files as u64) {
        return Err(Error::Domain(format!("M = {memory} outside [0, {files}]")));
    }
    Ok(())
}

fn pow(base: &Rational, exp: usize) -> Rational {
    (0..exp).fold(Rational::one(), |acc, _| acc * base)
}

/// `t = K M / N`.
pub fn cache_parameter(files: usize, users: usize, memory: &Rational) -> Rational {
    memory * rational_int(users as u64) / rational_int(files as u64)
}

/// `(C(K,t+1) - C(K-n_e,t+1)) / C(K,t)`: the leader scheme's rate for a
/// demand with `n_e` distinct files, and the `c_t` sequence of the converse.
pub fn distinct_rate(users: usize, n_e: usize, t: usize) -> Rational {
    let sent = choose(users, t + 1) - choose(users - n_e, t + 1);
    Rational::new(sent.into(), choose(users, t).into())
}

// Always through the hull: the baseline's integer points are not convex.
fn at_t(users: usize, t: &Rational, point: impl Fn(usize) -> Rational) -> Result<Rational> {
    let pts = EnvelopePoints::from_fn(users as u64, |ti| point(ti as usize))?;
    lower_convex_envelope(&pts, t)
}

/// Minimum average rate under uniform demands.
pub fn avg_rate_optimal(files: usize, users: usize, memory: &Rational) -> Result<Rational> {
    check_memory(files, users, memory)?;
    let dist = ne_distribution(files, users)?;
    let t = cache_parameter(files, users, memory);
    at_t(users, &t, |ti| dist.expect(|e| distinct_rate(users, e, ti)))
}

/// Minimum worst-case rate.
pub fn peak_rate_optimal(files: usize, users: usize, memory: &Rational) -> Result<Rational> {
    check_memory(files, users, memory)?;
    let t = cache_parameter(files, users, memory);
    at_t(users, &t, |ti| distinct_rate(users, files.min(users), ti))
}

/// How the centralized baseline interpolates between integer `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ManInterpolation {
    /// Envelope over integer `t` of `min{(K-t)/(t+1), E[N_e](1-t/K)}`.
    #[default]
    EnvelopeOfMin,
    /// `E_d` of the per-demand envelope of `min{(K-t)/(t+1), N_e(d)(1-t/K)}`.
    PerDemand,
}

fn man_point(users: usize, t: usize, n_e: &Rational) -> Rational {
    let coded = Rational::new(((users - t) as u64).into(), ((t + 1) as u64).into());
    let uncoded = n_e * (Rational::one() - Rational::new((t as u64).into(), (users as u64).into()));
    coded.min(uncoded)
}

/// Average rate of the prior centralized scheme (coded multicast or
/// uncoded delivery, whichever is cheaper, with memory sharing).
pub fn man_centralized_avg(files: usize, users: usize, memory: &Rational) -> Result<Rational> {
    man_centralized_avg_with(files, users, memory, ManInterpolation::default())
}

pub fn man_centralized_avg_with(
    files: usize,
    users: usize,
    memory: &Rational,
    mode: ManInterpolation,
) -> Result<Rational> {
    check_memory(files, users, memory)?;
    let dist = ne_distribution(files, users)?;
    let t = cache_parameter(files, users, memory);
    match mode {
        ManInterpolation::EnvelopeOfMin => {
            let mean = dist.mean();
            at_t(users, &t, |ti| man_point(users, ti, &mean))
        }
        ManInterpolation::PerDemand => {
            let mut total = Rational::zero();
            for (e, p) in dist.probs() {
                let n_e = rational_int(*e as u64);
                total += p * at_t(users, &t, |ti| man_point(users, ti, &n_e))?;
            }
            Ok(total)
        }
    }
}

fn dec_integrand(files: usize, memory: &Rational, n_e: usize) -> Rational {
    if memory.is_zero() {
        return rational_int(n_e as u64);
    }
    let n = rational_int(files as u64);
    let keep = (&n - memory) / &n;
    (&n - memory) / memory * (Rational::one() - pow(&keep, n_e))
}

/// Decentralized rate for one demand with `n_e` distinct files:
/// `(N-M)/M (1 - ((N-M)/N)^n_e)`, and `n_e` when `M = 0`.
pub fn dec_rate_for(files: usize, memory: &Rational, n_e: usize) -> Result<Rational> {
    check_memory(files, 1, memory)?;
    Ok(dec_integrand(files, memory, n_e))
}

/// The same rate as the per-level sum
/// `sum_j p^j (1-p)^(K-j) (C(K,j+1) - C(K-n_e,j+1))` with `p = M/N`.
pub fn dec_level_sum(files: usize, memory: &Rational, users: usize, n_e: usize) -> Result<Rational> {
    check_memory(files, users, memory)?;
    if n_e > users {
        return Err(Error::Domain(format!("n_e = {n_e} exceeds K = {users}")));
    }
    let p = memory / rational_int(files as u64);
    let q = Rational::one() - &p;
    Ok((0..=users)
        .map(|j| {
            let sent = choose(users, j + 1) - choose(users - n_e, j + 1);
            pow(&p, j) * pow(&q, users - j) * rational_int(sent)
        })
        .sum())
}

/// Minimum average rate with decentralized placement.
pub fn dec_avg_rate(files: usize, memory: &Rational, users: usize) -> Result<Rational> {
    check_memory(files, users, memory)?;
    Ok(ne_distribution(files, users)?.expect(|e| dec_integrand(files, memory, e)))
}

/// Minimum peak rate with decentralized placement.
pub fn dec_peak_rate(files: usize, memory: &Rational, users: usize) -> Result<Rational> {
    check_memory(files, users, memory)?;
    Ok(dec_integrand(files, memory, files.min(users)))
}

fn man_dec_coded(files: usize, memory: &Rational, users: usize) -> Rational {
    if memory.is_zero() {
        return rational_int(users as u64);
    }
    let n = rational_int(files as u64);
    &n / memory * (Rational::one() - pow(&(Rational::one() - memory / &n), users))
}

/// Prior decentralized scheme:
/// `(N-M)/N * min{(N/M)(1-(1-M/N)^K), E[N_e]}` (its `M -> 0` limit at `M = 0`).
pub fn man_decentralized_avg(files: usize, memory: &Rational, users: usize) -> Result<Rational> {
    check_memory(files, users, memory)?;
    let mean = ne_distribution(files, users)?.mean();
    let n = rational_int(files as u64);
    Ok((&n - memory) / &n * man_dec_coded(files, memory, users).min(mean))
}

/// [`man_decentralized_avg`] after memory sharing with uncoded delivery: the
/// lower convex envelope in `M` of `(0, E[N_e])` and the coded branch.
pub fn man_decentralized_avg_shared(files: usize, memory: &Rational, users: usize) -> Result<f64> {
    check_memory(files, users, memory)?;
    let mean = to_f64(&ne_distribution(files, users)?.mean());
    let n = files as f64;
    let coded = |m: f64| -> f64 {
        if m <= 0.0 {
            users as f64
        } else {
            (n - m) / m * (1.0 - (1.0 - m / n).powi(users as i32))
        }
    };
    // Slope of the chord from (0, E[N_e]) to the coded curve; the tangent
    // point minimises it. The chord slope is unimodal for a convex curve.
    let slope = |m: f64| (coded(m) - mean) / m;
    let (mut lo, mut hi) = (0.0f64, n);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if slope(a.max(f64::MIN_POSITIVE)) <= slope(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let tangent = (0.5 * (lo + hi)).max(f64::MIN_POSITIVE);
    let m = to_f64(memory);
    if m < tangent {
        Ok(mean + slope(tangent) * m)
    } else {
        Ok(coded(m))
    }
}

/// `a_n`: number of database bits cached by exactly `n` users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheProfile {
    files: usize,
    file_bits: usize,
    counts: Vec<u64>,
}

impl CacheProfile {
    /// Validates `sum a_n = N F`.
    pub fn new(counts: Vec<u64>, files: usize, file_bits: usize) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Contract("profile needs entries for n = 0..=K".into()));
        }
        let total: u64 = counts.iter().sum();
        if total != (files * file_bits) as u64 {
            return Err(Error::Contract(format!("profile covers {total} bits, expected N F = {}", files * file_bits)));
        }
        Ok(CacheProfile { files, file_bits, counts })
    }

    pub fn from_placement(placement: &Placement) -> Self {
        let mut counts = vec![0u64; placement.users() + 1];
        for m in placement.caching_masks() {
            counts[m.count_ones() as usize] += 1;
        }
        CacheProfile { files: placement.files(), file_bits: placement.file_bits(), counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn users(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    /// `sum n a_n / (N F)`, the average number of caches holding a bit.
    pub fn mean_replication(&self) -> Rational {
        let weighted: u64 = self.counts.iter().enumerate().map(|(n, &a)| n as u64 * a).sum();
        Rational::new(weighted.into(), ((self.files * self.file_bits) as u64).into())
    }
}

/// Lower bound on the average rate within the type of `stats` for the
/// placement summarised by `profile`:
/// `sum_n a_n/(N F) c_n - (1/F + N_e^2 eps)`.
pub fn converse_bound(profile: &CacheProfile, stats: &DemandStats, eps: &Rational) -> Result<Rational> {
    let users = profile.users();
    if stats.counts().len() != profile.files || stats.users() != users {
        return Err(Error::Contract(format!(
            "statistics for {} files / {} users do not match the profile ({} files / {users} users)",
            stats.counts().len(),
            stats.users(),
            profile.files
        )));
    }
    if *eps < Rational::zero() {
        return Err(Error::Domain("eps must be non-negative".into()));
    }
    let total = rational_int((profile.files * profile.file_bits) as u64);
    let n_e = stats.n_e();
    let sum: Rational = profile
        .counts
        .iter()
        .enumerate()
        .map(|(n, &a)| rational_int(a) / &total * distinct_rate(users, n_e, n))
        .sum();
    let slack = Rational::new(1.into(), (profile.file_bits as u64).into()) + eps * rational_int((n_e * n_e) as u64);
    Ok(sum - slack)
}

/// Named tradeoff formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    OptimalAvg,
    OptimalPeak,
    ManAvg,
    ManAvgPerDemand,
    DecAvg,
    DecPeak,
    ManDecAvg,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::OptimalAvg,
        Scheme::ManAvg,
        Scheme::ManAvgPerDemand,
        Scheme::OptimalPeak,
        Scheme::DecAvg,
        Scheme::ManDecAvg,
        Scheme::DecPeak,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::OptimalAvg => "optimal-avg",
            Scheme::OptimalPeak => "optimal-peak",
            Scheme::ManAvg => "man-avg",
            Scheme::ManAvgPerDemand => "man-avg-per-demand",
            Scheme::DecAvg => "dec-avg",
            Scheme::DecPeak => "dec-peak",
            Scheme::ManDecAvg => "man-dec-avg",
        }
    }

    /// The optimal curve a baseline is compared against.
    pub fn optimum(self) -> Option<Scheme> {
        match self {
            Scheme::ManAvg | Scheme::ManAvgPerDemand => Some(Scheme::OptimalAvg),
            Scheme::ManDecAvg => Some(Scheme::DecAvg),
            _ => None,
        }
    }

    /// Rate at cache size `memory`. `man-dec-avg` is the memory-shared
    /// baseline; every other scheme is exact.
    pub fn evaluate(self, files: usize, users: usize, memory: &Rational) -> Result<f64> {
        match self.evaluate_exact(files, users, memory)? {
            Some(r) => Ok(to_f64(&r)),
            None => man_decentralized_avg_shared(files, memory, users),
        }
    }

    pub fn evaluate_exact(self, files: usize, users: usize, memory: &Rational) -> Result<Option<Rational>> {
        Ok(Some(match self {
            Scheme::OptimalAvg => avg_rate_optimal(files, users, memory)?,
            Scheme::OptimalPeak => peak_rate_optimal(files, users, memory)?,
            Scheme::ManAvg => man_centralized_avg(files, users, memory)?,
            Scheme::ManAvgPerDemand => man_centralized_avg_with(files, users, memory, ManInterpolation::PerDemand)?,
            Scheme::DecAvg => dec_avg_rate(files, memory, users)?,
            Scheme::DecPeak => dec_peak_rate(files, memory, users)?,
            Scheme::ManDecAvg => {
                check_memory(files, users, memory)?;
                return Ok(None);
            }
        }))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.label() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Scheme::ALL.iter().map(|s| s.label()).collect();
                Error::Usage(format!("unknown scheme `{s}` (known: {})", known.join(", ")))
            })
    }
}

/// Sampled `(M, R)` points of one formula.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    pub scheme: Scheme,
    pub files: usize,
    pub users: usize,
    pub points: Vec<(Rational, f64)>,
}

pub fn rate_curve(scheme: Scheme, files: usize, users: usize, grid: &[Rational]) -> Result<RateCurve> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("grid must be strictly increasing".into()));
    }
    let points = grid
        .iter()
        .map(|m| Ok((m.clone(), scheme.evaluate(files, users, m)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve { scheme, files, users, points })
}

/// Rational rounded half away from zero to `digits` fractional digits.
pub fn format_decimal(value: &Rational, digits: u32) -> String {
    let scale = num_bigint::BigInt::from(10u32).pow(digits);
    let scaled = (value * Rational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled < num_bigint::BigInt::zero();
    let abs = if negative { -scaled } else { scaled };
    let (whole, frac) = num_integer::Integer::div_rem(&abs, &scale);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    format!("{sign}{whole}.{frac:0>width$}", width = digits as usize)
}

/// Parses `start:stop:step`. `stop` is included when `step` divides the range.
pub fn parse_grid(text: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Usage(format!("grid `{text}` is not `start:stop:step`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<Rational> = parts
        .iter()
        .map(|p| crate::model::parse_rational(p.trim()).ok_or_else(bad))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (&v[0], &v[1], &v[2]);
    if *step <= Rational::zero() {
        return Err(Error::Usage(format!("grid step must be positive, got {step}")));
    }
    if stop < start {
        return Err(Error::Usage(format!("grid stop {stop} below start {start}")));
    }
    let count = ((stop - start) / step).floor().to_integer();
    let count: usize = num_traits::ToPrimitive::to_usize(&count)
        .filter(|&c| c < 1_000_000)
        .ok_or_else(|| Error::Usage("grid has too many points".into()))?;
    Ok((0..=count).map(|i| start + step * rational_int(i as u64)).collect())
}

/// Long-format CSV `M,R,scheme,N,K`: grid order, then curve order.
pub fn curves_to_csv(curves: &[RateCurve]) -> Result<String> {
    let mut out = String::from("M,R,scheme,N,K\n");
    let Some(first) = curves.first() else {
        return Ok(out);
    };
    if curves.iter().any(|c| c.points.len() != first.points.len()) {
        return Err(Error::Contract("curves sampled on different grids".into()));
    }
    for i in 0..first.points.len() {
        for c in curves {
            let (m, r) = &c.points[i];
            out.push_str(&format!("{},{r:.6},{},{},{}\n", format_decimal(m, 6), c.scheme, c.files, c.users));
        }
    }
    Ok(out)
}

/// Wide-format CSV `M,<scheme>...`, one column per curve.
pub fn curves_to_table(curves: &[RateCurve]) -> Result<String> {
    let mut out = String::from("M");
    for c in curves {
        out.push(',');
        out.push_str(c.scheme.label());
    }
    out.push('\n');
    let Some(first) = curves.first() else {
        return Ok(out);
    };
    if curves.iter().any(|c| c.points.len() != first.points.len()) {
        return Err(Error::Contract("curves sampled on different grids".into()));
    }
    for (i, (m, _)) in first.points.iter().enumerate() {
        out.push_str(&format_decimal(m, 6));
        for c in curves {
            out.push_str(&format!(",{:.6}", c.points[i].1));
        }
        out.push('\n');
    }
    Ok(out)
}

/// `E[N_e]` for a uniform demand.
pub fn expected_distinct(files: usize, users: usize) -> Result<Rational> {
    Ok(ne_distribution(files, users)?.mean())
}

pub fn ne_law(files: usize, users: usize) -> Result<NeDistribution> {
    ne_distribution(files, users)
}
