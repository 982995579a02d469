//! Exact integer combinatorics, lexicographic subset ranking and the lower
//! convex envelope used for memory sharing.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational used for every rate and probability in the crate.
pub type Rational = BigRational;

/// Largest user count supported by subset bitmasks.
pub const MAX_USERS: usize = 64;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_int(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `C(n, k)`, with `C(n, k) = 0` for `k > n`.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n - k + i) / i stays an exact binomial at every step.
        acc = acc
            .checked_mul(u128::from(n - k + i))
            .ok_or_else(|| Error::ArithmeticRange(format!("C({n},{k}) overflows")))?
            / u128::from(i);
    }
    u64::try_from(acc).map_err(|_| Error::ArithmeticRange(format!("C({n},{k}) exceeds u64")))
}

/// Binomial for internal callers whose arguments are bounded by [`MAX_USERS`].
pub(crate) fn choose(n: usize, k: usize) -> u64 {
    if n > MAX_USERS {
        return binomial(n as u64, k as u64).expect("binomial within u64");
    }
    if k > n {
        return 0;
    }
    PASCAL[n][k]
}

static PASCAL: [[u64; MAX_USERS + 1]; MAX_USERS + 1] = pascal();

const fn pascal() -> [[u64; MAX_USERS + 1]; MAX_USERS + 1] {
    let mut rows = [[0u64; MAX_USERS + 1]; MAX_USERS + 1];
    let mut i = 0;
    while i <= MAX_USERS {
        rows[i][0] = 1;
        let mut j = 1;
        while j <= i {
            rows[i][j] = rows[i - 1][j - 1] + rows[i - 1][j];
            j += 1;
        }
        i += 1;
    }
    rows
}

/// Number of maps from `{1..k}` onto `{1..e}`, by inclusion-exclusion.
///
/// Returns 0 when `e > k` (no map can be onto) and 1 for `k = e = 0`.
pub fn surjection_count(k: u32, e: u32) -> BigUint {
    if e > k {
        return BigUint::zero();
    }
    let mut total = BigInt::zero();
    let mut c = BigInt::one();
    for i in 0..=e {
        let term = &c * BigInt::from(e - i).pow(k);
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        // C(e, i+1) from C(e, i)
        c = c * BigInt::from(e - i) / BigInt::from(i + 1);
    }
    total
        .to_biguint()
        .expect("inclusion-exclusion count is non-negative")
}

/// A subset of users `{1..K}` together with its rank among all subsets of
/// the same size in lexicographic order of the sorted member lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetId {
    members: Vec<usize>,
    rank: u64,
}

impl SubsetId {
    /// Builds the subset from 1-based members in any order.
    pub fn from_members(users: usize, members: &[usize]) -> Result<Self> {
        if users > MAX_USERS {
            return Err(Error::Domain(format!("at most {MAX_USERS} users supported, got {users}")));
        }
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate member in {members:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&m| m == 0 || m > users) {
            return Err(Error::Domain(format!("user {bad} outside 1..={users}")));
        }
        let rank = rank_sorted(users, &sorted);
        Ok(SubsetId { members: sorted, rank })
    }

    pub(crate) fn from_mask(users: usize, mask: u64) -> Self {
        let members: Vec<usize> = (1..=users).filter(|u| mask >> (u - 1) & 1 == 1).collect();
        let rank = rank_of_mask(users, mask);
        SubsetId { members, rank }
    }

    /// Inverse of [`SubsetId::rank`].
    pub fn unrank(users: usize, size: usize, rank: u64) -> Result<Self> {
        if size > users || users > MAX_USERS {
            return Err(Error::Domain(format!("no subsets of size {size} in 1..={users}")));
        }
        let count = choose(users, size);
        if rank >= count {
            return Err(Error::Domain(format!("rank {rank} >= C({users},{size}) = {count}")));
        }
        let mut members = Vec::with_capacity(size);
        let mut remaining = rank;
        let mut next = 1;
        for slot in 0..size {
            loop {
                // subsets whose slot-th member is `next`
                let block = choose(users - next, size - slot - 1);
                if remaining < block {
                    members.push(next);
                    next += 1;
                    break;
                }
                remaining -= block;
                next += 1;
            }
        }
        Ok(SubsetId { members, rank })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn rank(&self) -> u64 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, user: usize) -> bool {
        self.members.binary_search(&user).is_ok()
    }

    /// Bit `u - 1` set for every member `u`.
    pub fn mask(&self) -> u64 {
        self.members.iter().fold(0, |m, &u| m | 1 << (u - 1))
    }

    /// Comma separated members, e.g. `1,2,3`.
    pub fn to_csv(&self) -> String {
        let parts: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        parts.join(",")
    }
}

impl fmt::Display for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_csv())
    }
}

fn rank_sorted(users: usize, members: &[usize]) -> u64 {
    let size = members.len();
    let mut rank = 0;
    let mut prev = 0;
    for (slot, &m) in members.iter().enumerate() {
        for skipped in prev + 1..m {
            rank += choose(users - skipped, size - slot - 1);
        }
        prev = m;
    }
    rank
}

/// Same as `SubsetId::from_mask(users, mask).rank()` without building the subset.
pub(crate) fn rank_of_mask(users: usize, mask: u64) -> u64 {
    let size = mask.count_ones() as usize;
    let mut rank = 0;
    let mut prev = 0;
    let mut rest = mask;
    for slot in 0..size {
        let m = rest.trailing_zeros() as usize + 1;
        rest &= rest - 1;
        // sum of C(users - s, size - slot - 1) over the skipped s in prev+1..m
        rank += choose(users - prev, size - slot) - choose(users - m + 1, size - slot);
        prev = m;
    }
    rank
}

/// All `C(users, size)` subsets in lexicographic order; `rank` equals position.
pub fn enumerate_subsets(users: usize, size: usize) -> Result<Vec<SubsetId>> {
    if size > users {
        return Err(Error::Domain(format!("subset size {size} exceeds {users} users")));
    }
    if users > MAX_USERS {
        return Err(Error::Domain(format!("at most {MAX_USERS} users supported, got {users}")));
    }
    let total = binomial(users as u64, size as u64)?;
    let mut out = Vec::with_capacity(total as usize);
    let mut current: Vec<usize> = (1..=size).collect();
    for rank in 0..total {
        out.push(SubsetId { members: current.clone(), rank });
        // advance to the next combination
        let mut i = size;
        while i > 0 && current[i - 1] == users - size + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        current[i - 1] += 1;
        for j in i..size {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Sampled values `(t, value)` at strictly increasing integer abscissae.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopePoints {
    points: Vec<(u64, Rational)>,
}

impl EnvelopePoints {
    pub fn new(points: Vec<(u64, Rational)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("envelope needs at least one point".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain("envelope abscissae must be strictly increasing".into()));
        }
        if points.iter().any(|(_, v)| v.is_negative()) {
            return Err(Error::Domain("envelope values must be non-negative".into()));
        }
        Ok(EnvelopePoints { points })
    }

    /// Points `(t, f(t))` for `t = 0..=max_t`.
    pub fn from_fn(max_t: u64, f: impl Fn(u64) -> Rational) -> Result<Self> {
        EnvelopePoints::new((0..=max_t).map(|t| (t, f(t))).collect())
    }

    pub fn points(&self) -> &[(u64, Rational)] {
        &self.points
    }

    /// Vertices of the lower convex hull (monotone chain), left to right.
    pub fn lower_hull(&self) -> Vec<(u64, Rational)> {
        let mut hull: Vec<(u64, Rational)> = Vec::with_capacity(self.points.len());
        for p in &self.points {
            while hull.len() >= 2 {
                let (o, a) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
                if cross(o, a, p) <= Rational::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p.clone());
        }
        hull
    }
}

fn cross(o: &(u64, Rational), a: &(u64, Rational), b: &(u64, Rational)) -> Rational {
    let ax = rational_int(a.0) - rational_int(o.0);
    let bx = rational_int(b.0) - rational_int(o.0);
    ax * (&b.1 - &o.1) - (&a.1 - &o.1) * bx
}

/// Value at `x` of the lower convex envelope of `pts`.
pub fn lower_convex_envelope(pts: &EnvelopePoints, x: &Rational) -> Result<Rational> {
    let hull = pts.lower_hull();
    let lo = rational_int(hull[0].0);
    let hi = rational_int(hull[hull.len() - 1].0);
    if *x < lo || *x > hi {
        return Err(Error::Domain(format!("x = {x} outside [{lo}, {hi}]")));
    }
    for seg in hull.windows(2) {
        let (x0, x1) = (rational_int(seg[0].0), rational_int(seg[1].0));
        if *x <= x1 {
            let w = (x - &x0) / (&x1 - &x0);
            return Ok(&seg[0].1 + (&seg[1].1 - &seg[0].1) * w);
        }
    }
    Ok(hull[0].1.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_rank_matches_member_rank() {
        for users in 0..=10 {
            for mask in 0u64..1 << users {
                let members: Vec<usize> = (1..=users).filter(|u| mask >> (u - 1) & 1 == 1).collect();
                assert_eq!(rank_of_mask(users, mask), rank_sorted(users, &members), "{users} {mask:b}");
            }
        }
        assert_eq!(choose(64, 32), binomial(64, 32).unwrap());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(6, 3).unwrap(), 20);
        assert_eq!(binomial(3, 4).unwrap(), 0);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert!(matches!(binomial(200, 100), Err(Error::ArithmeticRange(_))));
    }

    #[test]
    fn binomial_30_2_matches_pascal() {
        // Pascal triangle as the independent route
        let mut row = vec![1u64];
        for _ in 0..30 {
            let mut next = vec![1u64; row.len() + 1];
            for i in 1..row.len() {
                next[i] = row[i - 1] + row[i];
            }
            row = next;
        }
        assert_eq!(row[2], 435);
        assert_eq!(binomial(30, 2).unwrap(), 435);
    }

    #[test]
    fn pascal_identity() {
        for n in 1..=30u64 {
            for k in 1..=n {
                assert_eq!(
                    binomial(n, k).unwrap(),
                    binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn enumerate_small() {
        let subsets = enumerate_subsets(3, 2).unwrap();
        let members: Vec<&[usize]> = subsets.iter().map(|s| s.members()).collect();
        assert_eq!(members, vec![&[1, 2][..], &[1, 3], &[2, 3]]);
        let empty = enumerate_subsets(4, 0).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].is_empty());
        assert_eq!(enumerate_subsets(6, 3).unwrap().len(), 20);
        assert!(matches!(enumerate_subsets(3, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for users in 0..=12 {
            for size in 0..=users {
                for (pos, s) in enumerate_subsets(users, size).unwrap().iter().enumerate() {
                    assert_eq!(s.rank(), pos as u64);
                    let back = SubsetId::unrank(users, size, s.rank()).unwrap();
                    assert_eq!(&back, s);
                    assert_eq!(SubsetId::from_members(users, s.members()).unwrap(), back);
                    assert_eq!(SubsetId::from_mask(users, s.mask()), back);
                }
            }
        }
    }

    #[test]
    fn bad_members_rejected() {
        assert!(SubsetId::from_members(4, &[1, 1]).is_err());
        assert!(SubsetId::from_members(4, &[0]).is_err());
        assert!(SubsetId::from_members(4, &[5]).is_err());
        assert!(SubsetId::unrank(4, 2, 6).is_err());
    }

    fn brute_surjections(k: u32, e: u32) -> u64 {
        // every map {1..k} -> {1..e}, encoded base e
        let total = (e as u64).pow(k);
        (0..total)
            .filter(|&code| {
                let mut hit = vec![false; e as usize];
                let mut c = code;
                for _ in 0..k {
                    hit[(c % e as u64) as usize] = true;
                    c /= e as u64;
                }
                hit.iter().all(|&h| h)
            })
            .count() as u64
    }

    #[test]
    fn surjections_match_brute_force() {
        assert_eq!(surjection_count(3, 2), BigUint::from(6u32));
        assert_eq!(surjection_count(2, 2), BigUint::from(2u32));
        for k in 1..=7 {
            assert_eq!(surjection_count(k, 1), BigUint::one());
            for e in 1..=k.min(5) {
                assert_eq!(surjection_count(k, e), BigUint::from(brute_surjections(k, e)));
            }
        }
        assert_eq!(surjection_count(2, 3), BigUint::zero());
    }

    #[test]
    fn demand_partition_identity() {
        // sum_e C(N,e) * Surj(K,e) = N^K
        for n in 1..=8u32 {
            for k in 1..=8u32 {
                let sum: BigUint = (0..=n)
                    .map(|e| BigUint::from(binomial(n as u64, e as u64).unwrap()) * surjection_count(k, e))
                    .sum();
                assert_eq!(sum, BigUint::from(n).pow(k));
            }
        }
    }

    #[test]
    fn envelope_examples() {
        let convex = EnvelopePoints::new(vec![
            (0, rational_int(2)),
            (1, rational(1, 2)),
            (2, rational_int(0)),
        ])
        .unwrap();
        assert_eq!(lower_convex_envelope(&convex, &rational(1, 2)).unwrap(), rational(5, 4));
        assert_eq!(lower_convex_envelope(&convex, &rational_int(1)).unwrap(), rational(1, 2));

        let bump = EnvelopePoints::new(vec![
            (0, rational_int(3)),
            (1, rational_int(3)),
            (2, rational_int(0)),
        ])
        .unwrap();
        assert_eq!(bump.lower_hull().len(), 2);
        assert_eq!(lower_convex_envelope(&bump, &rational_int(1)).unwrap(), rational(3, 2));
        assert!(lower_convex_envelope(&bump, &rational(5, 2)).is_err());
        assert!(lower_convex_envelope(&bump, &rational(-1, 2)).is_err());
    }

    #[test]
    fn envelope_point_validation() {
        assert!(EnvelopePoints::new(vec![]).is_err());
        assert!(EnvelopePoints::new(vec![(1, rational_int(0)), (1, rational_int(0))]).is_err());
        assert!(EnvelopePoints::new(vec![(0, rational(-1, 2))]).is_err());
        let single = EnvelopePoints::new(vec![(3, rational(7, 3))]).unwrap();
        assert_eq!(lower_convex_envelope(&single, &rational_int(3)).unwrap(), rational(7, 3));
    }

    #[test]
    fn rate_sequence_is_convex() {
        for k in 1..=12usize {
            for ne in 1..=k {
                let c: Vec<Rational> = (0..=k)
                    .map(|t| {
                        rational_int(choose(k, t + 1) - choose(k - ne, t + 1)) / rational_int(choose(k, t))
                    })
                    .collect();
                for t in 1..k {
                    assert!(c[t] <= c[t - 1]);
                    assert!(&c[t - 1] + &c[t + 1] >= &c[t] * rational_int(2));
                }
                let pts = EnvelopePoints::from_fn(k as u64, |t| c[t as usize].clone()).unwrap();
                for (t, ct) in c.iter().enumerate() {
                    assert_eq!(&lower_convex_envelope(&pts, &rational_int(t as u64)).unwrap(), ct);
                }
            }
        }
    }
}
