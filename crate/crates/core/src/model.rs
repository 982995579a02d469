//! Database, placements, demands and demand statistics.
//!
//! Files and users are 1-based everywhere in the public API; bit positions
//! inside a file are 0-based, except in the placement text format.

use std::fmt::Write as _;
use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{zeros, Bits, BitsSlice};
use crate::combinatorics::{binomial, choose, surjection_count, Rational, MAX_USERS};
use crate::error::{Error, Result};

/// Seeded generator behind every random choice in the crate. ChaCha8 with a
/// `u64` seed expanded by `seed_from_u64` is portable across platforms.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `N` files of `F` i.i.d. uniform bits each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    file_bits: usize,
    rows: Vec<Bits>,
}

impl Database {
    /// Fills every file from the seeded generator, file 1 first.
    pub fn generate(files: usize, file_bits: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let rows = (0..files)
            .map(|_| {
                let mut bytes = vec![0u8; file_bits.div_ceil(8)];
                rng.fill_bytes(&mut bytes);
                let mut row = Bits::from_vec(bytes);
                row.truncate(file_bits);
                row
            })
            .collect();
        Database { file_bits, rows }
    }

    pub fn from_rows(rows: Vec<Bits>) -> Result<Self> {
        let file_bits = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != file_bits) {
            return Err(Error::Domain("all files must have the same length".into()));
        }
        Ok(Database { file_bits, rows })
    }

    pub fn files(&self) -> usize {
        self.rows.len()
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    /// Bits of file `i` (1-based).
    pub fn file(&self, i: usize) -> &BitsSlice {
        &self.rows[i - 1]
    }
}

/// Layout of a symmetric batch placement: file `i` is cut into `C(K,t)`
/// consecutive subfiles, the one for the `t`-subset of rank `r` occupying
/// bits `r * subfile_bits .. (r + 1) * subfile_bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchView {
    pub t: usize,
    pub subfile_bits: usize,
    pub subfiles: u64,
}

impl BatchView {
    pub fn range(&self, rank: u64) -> Range<usize> {
        let start = rank as usize * self.subfile_bits;
        start..start + self.subfile_bits
    }
}

/// Uncoded prefetching: which bits of which files each user stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    users: usize,
    files: usize,
    file_bits: usize,
    memory: Rational,
    // per user, bit (i-1)*F + j set iff bit j of file i is cached
    cached: Vec<Bits>,
    batch: Option<BatchView>,
}

impl Placement {
    /// Validates the cache budget `|M_k| <= M F` for every user.
    pub fn new(files: usize, file_bits: usize, memory: Rational, cached: Vec<Bits>) -> Result<Self> {
        let users = cached.len();
        if users == 0 || users > MAX_USERS {
            return Err(Error::Domain(format!("user count must be in 1..={MAX_USERS}, got {users}")));
        }
        if memory < Rational::zero() || memory > Rational::from_integer(files.into()) {
            return Err(Error::Domain(format!("cache size {memory} outside [0, {files}]")));
        }
        let budget = &memory * Rational::from_integer(file_bits.into());
        for (k, c) in cached.iter().enumerate() {
            if c.len() != files * file_bits {
                return Err(Error::Contract(format!("cache bitmap of user {} has wrong length", k + 1)));
            }
            if Rational::from_integer(c.count_ones().into()) > budget {
                return Err(Error::Contract(format!(
                    "user {} caches {} bits, more than M*F = {budget}",
                    k + 1,
                    c.count_ones()
                )));
            }
        }
        Ok(Placement { users, files, file_bits, memory, cached, batch: None })
    }

    pub(crate) fn with_batch(mut self, view: BatchView) -> Self {
        self.batch = Some(view);
        self
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    pub fn memory(&self) -> &Rational {
        &self.memory
    }

    pub fn batch_view(&self) -> Option<&BatchView> {
        self.batch.as_ref()
    }

    pub fn is_cached(&self, user: usize, file: usize, bit: usize) -> bool {
        self.cached[user - 1][(file - 1) * self.file_bits + bit]
    }

    pub fn cached_bits(&self, user: usize) -> usize {
        self.cached[user - 1].count_ones()
    }

    /// Users caching bit `bit` of `file`, as a mask with bit `k-1` for user `k`.
    pub fn caching_mask(&self, file: usize, bit: usize) -> u64 {
        let idx = (file - 1) * self.file_bits + bit;
        self.cached
            .iter()
            .enumerate()
            .fold(0, |m, (k, c)| if c[idx] { m | 1 << k } else { m })
    }

    /// Masks for every bit of every file, indexed `(file - 1) * F + bit`.
    pub fn caching_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.files * self.file_bits];
        for (k, c) in self.cached.iter().enumerate() {
            for idx in c.iter_ones() {
                masks[idx] |= 1 << k;
            }
        }
        masks
    }

    /// Recognizes a symmetric batch layout and attaches its view.
    pub fn detect_batch(self) -> Self {
        if self.batch.is_some() {
            return self;
        }
        for t in 0..=self.users {
            let subfiles = choose(self.users, t);
            if !self.file_bits.is_multiple_of(subfiles as usize) {
                continue;
            }
            let Ok(candidate) = crate::centralized::batch_placement(self.files, self.users, t, self.file_bits)
            else {
                continue;
            };
            if candidate.cached == self.cached {
                let view = candidate.batch.expect("batch placement has a view");
                return self.with_batch(view);
            }
        }
        self
    }

    /// The values a user actually holds after placement.
    pub fn cache_of(&self, db: &Database, user: usize) -> UserCache {
        let f = self.file_bits;
        let mask = &self.cached[user - 1];
        let mut data = Vec::with_capacity(self.files);
        let mut masks = Vec::with_capacity(self.files);
        for i in 1..=self.files {
            let m: Bits = mask[(i - 1) * f..i * f].to_bitvec();
            let d = m.clone() & db.file(i);
            data.push(d);
            masks.push(m);
        }
        UserCache { user, data, mask: masks }
    }

    /// Text form: header `K N F M`, then one line per user `k file:bit ...`
    /// with 1-based files and bits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.users, self.files, self.file_bits, self.memory);
        for (k, c) in self.cached.iter().enumerate() {
            write!(out, "{}", k + 1).unwrap();
            for idx in c.iter_ones() {
                write!(out, " {}:{}", idx / self.file_bits + 1, idx % self.file_bits + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Placement::to_text`] output; errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty placement file".into() })?;
        let hline = hline + 1;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse { line: hline, msg: "header must be `K N F M`".into() });
        }
        let int = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse { line: hline, msg: format!("bad {what} `{s}`") })
        };
        let users = int(fields[0], "K")?;
        let files = int(fields[1], "N")?;
        let file_bits = int(fields[2], "F")?;
        let memory = parse_rational(fields[3]).ok_or(Error::Parse { line: hline, msg: format!("bad M `{}`", fields[3]) })?;
        if users == 0 || users > MAX_USERS || files == 0 || file_bits == 0 {
            return Err(Error::Parse { line: hline, msg: "K, N, F must be positive (K <= 64)".into() });
        }
        let mut cached = vec![zeros(files * file_bits); users];
        let mut seen = vec![false; users];
        for (idx, line) in lines {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let mut tokens = line.split_whitespace();
            let user: usize = tokens
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("expected user index".into()))?;
            if user == 0 || user > users {
                return Err(err(format!("user {user} outside 1..={users}")));
            }
            if std::mem::replace(&mut seen[user - 1], true) {
                return Err(err(format!("user {user} listed twice")));
            }
            for tok in tokens {
                let (fs, bs) = tok.split_once(':').ok_or_else(|| err(format!("expected file:bit, got `{tok}`")))?;
                let (Ok(file), Ok(bit)) = (fs.parse::<usize>(), bs.parse::<usize>()) else {
                    return Err(err(format!("expected file:bit, got `{tok}`")));
                };
                if file == 0 || file > files || bit == 0 || bit > file_bits {
                    return Err(err(format!("`{tok}` outside the database")));
                }
                cached[user - 1].set((file - 1) * file_bits + bit - 1, true);
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Parse { line: hline, msg: format!("no line for user {}", missing + 1) });
        }
        Placement::new(files, file_bits, memory, cached).map(Placement::detect_batch)
    }
}

/// Accepts `3`, `3/2` or `1.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" { BigInt::zero() } else { whole.parse().ok()? };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().ok()?;
        let f = if negative { -f } else { f };
        return Some(Rational::new(w * &scale + f, scale));
    }
    s.trim().parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Cached contents of one user. Reads of bits outside the cache fail.
#[derive(Clone, Debug)]
pub struct UserCache {
    user: usize,
    data: Vec<Bits>,
    mask: Vec<Bits>,
}

impl UserCache {
    pub fn user(&self) -> usize {
        self.user
    }

    pub fn has(&self, file: usize, bit: usize) -> bool {
        self.mask[file - 1][bit]
    }

    /// Cached bits `range` of `file`; every bit must be cached.
    pub fn range(&self, file: usize, range: Range<usize>) -> Result<Bits> {
        self.slice(file, range).map(|s| s.to_bitvec())
    }

    pub fn slice(&self, file: usize, range: Range<usize>) -> Result<&BitsSlice> {
        if self.mask[file - 1][range.clone()].not_all() {
            return Err(Error::Contract(format!(
                "user {} does not cache bits {range:?} of file {file}",
                self.user
            )));
        }
        Ok(&self.data[file - 1][range])
    }

    pub fn gather(&self, file: usize, positions: &[u32]) -> Result<Bits> {
        let mask = &self.mask[file - 1];
        if let Some(p) = positions.iter().find(|&&p| !mask[p as usize]) {
            return Err(Error::Contract(format!("user {} does not cache bit {p} of file {file}", self.user)));
        }
        Ok(crate::bits::gather(&self.data[file - 1], positions))
    }

    pub(crate) fn file_data(&self, file: usize) -> &BitsSlice {
        &self.data[file - 1]
    }
}

/// Request vector: user `k` asks for file `d_k` in `1..=N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Demand {
    files: usize,
    requests: Vec<usize>,
}

impl Demand {
    pub fn new(requests: Vec<usize>, files: usize) -> Result<Self> {
        if requests.is_empty() || requests.len() > MAX_USERS {
            return Err(Error::Domain(format!("demand needs 1..={MAX_USERS} users")));
        }
        if let Some(&bad) = requests.iter().find(|&&d| d == 0 || d > files) {
            return Err(Error::Domain(format!("requested file {bad} outside 1..={files}")));
        }
        Ok(Demand { files, requests })
    }

    /// Uniformly random demand.
    pub fn random(files: usize, users: usize, rng: &mut impl Rng) -> Self {
        let requests = (0..users).map(|_| rng.gen_range(1..=files)).collect();
        Demand { files, requests }
    }

    /// All `N^K` demands, the last user varying fastest.
    pub fn all(files: usize, users: usize) -> impl Iterator<Item = Demand> {
        let total = (files as u64).checked_pow(users as u32).expect("N^K fits u64");
        (0..total).map(move |mut code| {
            let mut requests = vec![0; users];
            for slot in requests.iter_mut().rev() {
                *slot = (code % files as u64) as usize + 1;
                code /= files as u64;
            }
            Demand { files, requests }
        })
    }

    pub fn users(&self) -> usize {
        self.requests.len()
    }

    pub fn files(&self) -> usize {
        self.files
    }

    /// File requested by `user` (1-based).
    pub fn file_of(&self, user: usize) -> usize {
        self.requests[user - 1]
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn distinct(&self) -> usize {
        let mut seen = vec![false; self.files + 1];
        self.requests.iter().filter(|&&d| !std::mem::replace(&mut seen[d], true)).count()
    }
}

/// Sorted request counts `s(d)` padded to length `N`, and `N_e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandStats {
    counts: Vec<usize>,
    distinct: usize,
}

impl DemandStats {
    pub fn from_counts(mut counts: Vec<usize>) -> Self {
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let distinct = counts.iter().filter(|&&c| c > 0).count();
        DemandStats { counts, distinct }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n_e(&self) -> usize {
        self.distinct
    }

    pub fn users(&self) -> usize {
        self.counts.iter().sum()
    }

    /// A representative demand of this type: file 1 takes the largest count.
    pub fn representative(&self) -> Demand {
        let mut requests = Vec::with_capacity(self.users());
        for (i, &c) in self.counts.iter().enumerate() {
            requests.extend(std::iter::repeat_n(i + 1, c));
        }
        Demand { files: self.counts.len(), requests }
    }

    /// `|D_s|`: users assigned to count groups times files assigned to counts.
    pub fn type_size(&self) -> BigUint {
        let fact = |n: usize| -> BigUint { (1..=n).map(BigUint::from).product() };
        let mut size = fact(self.users());
        for &c in &self.counts {
            size /= fact(c);
        }
        let mut files = fact(self.counts.len());
        let mut i = 0;
        while i < self.counts.len() {
            let j = self.counts[i..].iter().take_while(|&&c| c == self.counts[i]).count();
            files /= fact(j);
            i += j;
        }
        size * files
    }
}

pub fn demand_stats(d: &Demand) -> DemandStats {
    let mut counts = vec![0; d.files];
    for &f in &d.requests {
        counts[f - 1] += 1;
    }
    DemandStats::from_counts(counts)
}

/// All statistics for `N` files and `K` users (partitions of `K` into at
/// most `N` parts), in decreasing lexicographic order.
pub fn enumerate_types(files: usize, users: usize) -> Vec<DemandStats> {
    fn go(remaining: usize, max_part: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<DemandStats>) {
        if remaining == 0 {
            let mut counts = prefix.clone();
            counts.resize(counts.len() + slots, 0);
            out.push(DemandStats::from_counts(counts));
            return;
        }
        if slots == 0 {
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            prefix.push(part);
            go(remaining - part, part, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(users, users, files, &mut Vec::new(), &mut out);
    out
}

/// Exact law of `N_e(d)` for a uniform demand.
#[derive(Clone, Debug, PartialEq)]
pub struct NeDistribution {
    probs: Vec<(usize, Rational)>,
}

impl NeDistribution {
    pub fn probs(&self) -> &[(usize, Rational)] {
        &self.probs
    }

    pub fn prob(&self, e: usize) -> Rational {
        self.probs
            .iter()
            .find(|(v, _)| *v == e)
            .map_or_else(Rational::zero, |(_, p)| p.clone())
    }

    pub fn expect(&self, f: impl Fn(usize) -> Rational) -> Rational {
        self.probs.iter().map(|(e, p)| p * f(*e)).sum()
    }

    pub fn mean(&self) -> Rational {
        self.expect(|e| Rational::from_integer(e.into()))
    }
}

/// `P(N_e = e) = C(N,e) Surj(K,e) / N^K` for `e = 1..=min(N,K)`.
pub fn ne_distribution(files: usize, users: usize) -> Result<NeDistribution> {
    if files == 0 || users == 0 {
        return Err(Error::Domain("N and K must be positive".into()));
    }
    let total = BigInt::from(files).pow(users as u32);
    let users_u32 = u32::try_from(users).map_err(|_| Error::ArithmeticRange("K too large".into()))?;
    let probs = (1..=files.min(users))
        .map(|e| -> Result<(usize, Rational)> {
            let ways = BigInt::from(binomial(files as u64, e as u64)?) * BigInt::from(surjection_count(users_u32, e as u32));
            Ok((e, Rational::new(ways, total.clone())))
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(probs.iter().map(|(_, p)| p.clone()).sum::<Rational>().is_one());
    Ok(NeDistribution { probs })
}

pub(crate) fn ratio_usize(n: usize, d: usize) -> Rational {
    let g = n.gcd(&d).max(1);
    Rational::new((n / g).into(), (d / g).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn database_is_deterministic_and_shaped() {
        assert_eq!(Database::generate(1, 8, 7), Database::generate(1, 8, 7));
        let db = Database::generate(3, 15, 99);
        assert_eq!(db.files(), 3);
        assert!((1..=3).all(|i| db.file(i).len() == 15));
    }

    #[test]
    fn database_bits_are_balanced() {
        let db = Database::generate(2, 100_000, 5);
        let ones = db.file(1).count_ones() + db.file(2).count_ones();
        let frac = ones as f64 / 200_000.0;
        assert!((0.49..=0.51).contains(&frac), "fraction of ones {frac}");
    }

    #[test]
    fn stats_examples() {
        let d = Demand::new(vec![1, 1, 2, 3], 4).unwrap();
        let s = demand_stats(&d);
        assert_eq!(s.counts(), &[2, 1, 1, 0]);
        assert_eq!(s.n_e(), 3);
        let single = demand_stats(&Demand::new(vec![1; 5], 3).unwrap());
        assert_eq!(single.counts(), &[5, 0, 0]);
        assert_eq!(single.n_e(), 1);
        let all = demand_stats(&Demand::new(vec![1, 2, 3], 3).unwrap());
        assert_eq!((all.counts(), all.n_e()), (&[1, 1, 1][..], 3));
    }

    #[test]
    fn demand_validation() {
        assert!(Demand::new(vec![0, 1], 2).is_err());
        assert!(Demand::new(vec![3], 2).is_err());
        assert!(Demand::new(vec![], 2).is_err());
    }

    #[test]
    fn types_for_four_files_four_users() {
        let types: Vec<Vec<usize>> = enumerate_types(4, 4).into_iter().map(|s| s.counts().to_vec()).collect();
        assert_eq!(
            types,
            vec![vec![4, 0, 0, 0], vec![3, 1, 0, 0], vec![2, 2, 0, 0], vec![2, 1, 1, 0], vec![1, 1, 1, 1]]
        );
        assert_eq!(enumerate_types(1, 6).len(), 1);
        let small: Vec<Vec<usize>> = enumerate_types(3, 2).into_iter().map(|s| s.counts().to_vec()).collect();
        assert_eq!(small, vec![vec![2, 0, 0], vec![1, 1, 0]]);
    }

    #[test]
    fn types_partition_all_demands() {
        for n in 1..=6 {
            for k in 1..=6 {
                let mut groups: BTreeMap<DemandStats, u64> = BTreeMap::new();
                for d in Demand::all(n, k) {
                    *groups.entry(demand_stats(&d)).or_default() += 1;
                }
                let mut types = enumerate_types(n, k);
                types.sort();
                assert_eq!(groups.keys().cloned().collect::<Vec<_>>(), types);
                for (s, count) in &groups {
                    assert_eq!(s.type_size(), BigUint::from(*count), "N={n} K={k} {s:?}");
                    assert_eq!(demand_stats(&s.representative()), *s);
                }
                assert_eq!(groups.values().sum::<u64>(), (n as u64).pow(k as u32));
            }
        }
    }

    #[test]
    fn ne_distribution_examples() {
        let d = ne_distribution(2, 2).unwrap();
        assert_eq!(d.probs(), &[(1, ratio_usize(1, 2)), (2, ratio_usize(1, 2))]);
        assert_eq!(ne_distribution(5, 1).unwrap().probs(), &[(1, Rational::one())]);
        let d = ne_distribution(3, 2).unwrap();
        assert_eq!(d.probs(), &[(1, ratio_usize(1, 3)), (2, ratio_usize(2, 3))]);
    }

    #[test]
    fn ne_distribution_matches_enumeration() {
        for n in 1..=6 {
            for k in 1..=6 {
                let mut hist = vec![0usize; k + 1];
                for d in Demand::all(n, k) {
                    hist[d.distinct()] += 1;
                }
                let total = n.pow(k as u32);
                let dist = ne_distribution(n, k).unwrap();
                for (e, &count) in hist.iter().enumerate().skip(1) {
                    assert_eq!(dist.prob(e), ratio_usize(count, total));
                }
            }
        }
    }

    #[test]
    fn ne_mean_matches_occupancy_formula() {
        for n in 1..=30 {
            for k in 1..=30 {
                let mean = crate::combinatorics::to_f64(&ne_distribution(n, k).unwrap().mean());
                let closed = n as f64 * (1.0 - (1.0 - 1.0 / n as f64).powi(k as i32));
                assert!((mean - closed).abs() < 1e-12, "N={n} K={k}");
            }
        }
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3"), Some(ratio_usize(3, 1)));
        assert_eq!(parse_rational("3/2"), Some(ratio_usize(3, 2)));
        assert_eq!(parse_rational("0.25"), Some(ratio_usize(1, 4)));
        assert_eq!(parse_rational(".5"), Some(ratio_usize(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn placement_text_roundtrip_and_errors() {
        let p = crate::centralized::batch_placement(2, 3, 1, 6).unwrap();
        let text = p.to_text();
        assert!(text.starts_with("3 2 6 2/3\n"));
        let back = Placement::parse(&text).unwrap();
        assert_eq!(back, p);

        let err = Placement::parse("2 1 4 1\n1 1:1\n2 1:9\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Placement::parse("2 1 4 1\n1 1:1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Placement::parse("2 1 4 1\n1 1-1\n2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        // over budget: 2 bits with M F = 1
        let err = Placement::parse("1 1 4 1/4\n1 1:1 1:2\n").unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn user_cache_refuses_uncached_reads() {
        let db = Database::generate(2, 6, 1);
        let p = crate::centralized::batch_placement(2, 3, 1, 6).unwrap();
        let cache = p.cache_of(&db, 1);
        // user 1 caches the subfile of {1}: bits 0..2
        assert_eq!(cache.range(2, 0..2).unwrap(), db.file(2)[0..2].to_bitvec());
        assert!(cache.range(2, 2..4).is_err());
        assert!(cache.gather(1, &[0, 3]).is_err());
    }
}
