//! Uniformly random prefetching and level-partitioned delivery.
//!
//! Every bit is grouped by the exact set of users caching it. Groups whose
//! caching set has `j` users form level `j`, and each level is delivered with
//! the centralized leader scheme, the groups playing the role of subfiles.
//! Groups of unequal length are zero-padded to the longest chunk of each XOR.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::bits::{gather, xor_padded, Bits, BitsSlice};
use crate::centralized::{reconstruct_with, select_leaders, BroadcastMessage};
use crate::combinatorics::{enumerate_subsets, Rational, SubsetId};
use crate::error::{Error, Result};
use crate::model::{seeded_rng, Database, Demand, Placement, UserCache};

/// Each user independently caches a uniform `floor(M F / N)`-subset of the
/// bits of every file.
pub fn random_placement(files: usize, users: usize, memory: &Rational, file_bits: usize, seed: u64) -> Result<Placement> {
    let n = Rational::from_integer(files.into());
    if *memory < Rational::from_integer(0.into()) || *memory > n {
        return Err(Error::Domain(format!("cache size {memory} outside [0, {files}]")));
    }
    let quota = (memory * Rational::from_integer(file_bits.into()) / n)
        .floor()
        .to_integer()
        .try_into()
        .map_err(|_| Error::ArithmeticRange("per-file quota".into()))?;
    let mut rng = seeded_rng(seed);
    let mut cached = vec![crate::bits::zeros(files * file_bits); users];
    for cache in cached.iter_mut() {
        for i in 0..files {
            for b in sample(&mut rng, file_bits, quota) {
                cache.set(i * file_bits + b, true);
            }
        }
    }
    Placement::new(files, file_bits, memory.clone(), cached)
}

/// Bits grouped by `(file, exact caching set)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelPartition {
    users: usize,
    files: usize,
    file_bits: usize,
    // caching-set mask -> per-file sorted bit positions
    groups: BTreeMap<u64, Vec<Vec<u32>>>,
}

impl LevelPartition {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    /// Positions of `file` cached by exactly the users in `mask`.
    pub fn group(&self, file: usize, mask: u64) -> &[u32] {
        self.groups.get(&mask).map_or(&[], |g| &g[file - 1])
    }

    /// Non-empty caching sets of level `j`, each with its per-file positions.
    pub fn level(&self, j: usize) -> impl Iterator<Item = (SubsetId, &[Vec<u32>])> + '_ {
        self.groups
            .iter()
            .filter(move |(m, _)| m.count_ones() as usize == j)
            .map(|(&m, g)| (SubsetId::from_mask(self.users, m), g.as_slice()))
    }

    /// Number of database bits in each level `0..=K`.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.users + 1];
        for (m, g) in &self.groups {
            sizes[m.count_ones() as usize] += g.iter().map(Vec::len).sum::<usize>();
        }
        sizes
    }

    /// Rebuilds the per-user cache sets the partition was made from.
    pub fn cached_by(&self, user: usize) -> Vec<(usize, u32)> {
        let mut out: Vec<(usize, u32)> = self
            .groups
            .iter()
            .filter(|(m, _)| *m >> (user - 1) & 1 == 1)
            .flat_map(|(_, g)| g.iter().enumerate().flat_map(|(i, pos)| pos.iter().map(move |&p| (i + 1, p))))
            .collect();
        out.sort_unstable();
        out
    }

    fn max_chunk(&self, d: &Demand, a_mask: u64) -> usize {
        members(a_mask)
            .map(|x| self.group(d.file_of(x), a_mask & !(1 << (x - 1))).len())
            .max()
            .unwrap_or(0)
    }
}

fn members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |b| mask >> b & 1 == 1).map(|b| b + 1)
}

pub fn level_partition(placement: &Placement) -> LevelPartition {
    let (files, f) = (placement.files(), placement.file_bits());
    let masks = placement.caching_masks();
    let mut groups: BTreeMap<u64, Vec<Vec<u32>>> = BTreeMap::new();
    for (idx, &m) in masks.iter().enumerate() {
        groups.entry(m).or_insert_with(|| vec![Vec::new(); files])[idx / f].push((idx % f) as u32);
    }
    LevelPartition { users: placement.users(), files, file_bits: f, groups }
}

/// XOR of the chunks `group(d_x, A \ {x})`, each zero-padded to the longest.
fn level_message(db: &Database, partition: &LevelPartition, d: &Demand, a_mask: u64) -> Bits {
    let mut acc = Bits::new();
    for x in members(a_mask) {
        let file = d.file_of(x);
        xor_padded(&mut acc, &gather(db.file(file), partition.group(file, a_mask & !(1 << (x - 1)))));
    }
    acc
}

/// Per level, every `(j+1)`-subset meeting the leader set with a non-empty
/// chunk, ordered by level then subset enumeration order.
pub fn encode_delivery_decentralized(db: &Database, partition: &LevelPartition, d: &Demand) -> Result<Vec<BroadcastMessage>> {
    check_demand(partition, d)?;
    let users = partition.users;
    let lead = select_leaders(d).mask();
    let per_level: Vec<Vec<BroadcastMessage>> = (0..users)
        .into_par_iter()
        .map(|j| -> Result<Vec<BroadcastMessage>> {
            Ok(enumerate_subsets(users, j + 1)?
                .into_iter()
                .filter(|a| a.mask() & lead != 0 && partition.max_chunk(d, a.mask()) > 0)
                .map(|a| {
                    let payload = level_message(db, partition, d, a.mask());
                    BroadcastMessage { subset: a, payload }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_level.into_iter().flatten().collect())
}

/// Zero bits inserted by padding, summed over the messages that would be sent.
pub fn padding_bits(partition: &LevelPartition, d: &Demand) -> Result<usize> {
    check_demand(partition, d)?;
    let lead = select_leaders(d).mask();
    let mut total = 0;
    for j in 0..partition.users {
        for a in enumerate_subsets(partition.users, j + 1)? {
            if a.mask() & lead == 0 {
                continue;
            }
            let lens: Vec<usize> = members(a.mask())
                .map(|x| partition.group(d.file_of(x), a.mask() & !(1 << (x - 1))).len())
                .collect();
            let max = lens.iter().copied().max().unwrap_or(0);
            total += lens.iter().map(|l| max - l).sum::<usize>();
        }
    }
    Ok(total)
}

/// Bits [`encode_delivery_decentralized`] would send, without building payloads.
pub fn delivery_bits(partition: &LevelPartition, d: &Demand) -> Result<usize> {
    check_demand(partition, d)?;
    let lead = select_leaders(d).mask();
    let mut total = 0;
    for j in 0..partition.users {
        for a in enumerate_subsets(partition.users, j + 1)? {
            if a.mask() & lead != 0 {
                total += partition.max_chunk(d, a.mask());
            }
        }
    }
    Ok(total)
}

/// Recovers `W_{d_k}` level by level, discarding padding with the known
/// group lengths.
pub fn decode_user_decentralized(
    user: usize,
    partition: &LevelPartition,
    cache: &UserCache,
    messages: &[BroadcastMessage],
    d: &Demand,
) -> Result<Bits> {
    check_demand(partition, d)?;
    if cache.user() != user {
        return Err(Error::Contract(format!("cache of user {} used for user {user}", cache.user())));
    }
    let leaders = select_leaders(d);
    let lead = leaders.mask();
    let index: HashMap<u64, &Bits> = messages.iter().map(|m| (m.subset.mask(), &m.payload)).collect();
    let empty = BitsSlice::empty();
    let lookup = |key: u64| -> Result<&BitsSlice> {
        match index.get(&key) {
            Some(b) => Ok(b.as_bitslice()),
            None if partition.max_chunk(d, key) == 0 => Ok(empty),
            None => Err(Error::MissingMessage { subset: SubsetId::from_mask(partition.users, key) }),
        }
    };

    let wanted = d.file_of(user);
    let bit = 1u64 << (user - 1);
    let mut out: Bits = cache.file_data(wanted).to_bitvec();
    for (&s_mask, groups) in &partition.groups {
        let target = &groups[wanted - 1];
        if s_mask & bit != 0 || target.is_empty() {
            continue;
        }
        let a_mask = s_mask | bit;
        let mut w: Bits = if a_mask & lead != 0 {
            lookup(a_mask)?.to_bitvec()
        } else {
            reconstruct_with(lookup, d, &leaders, &SubsetId::from_mask(partition.users, a_mask))?
        };
        for x in members(s_mask) {
            let file = d.file_of(x);
            xor_padded(&mut w, &cache.gather(file, partition.group(file, a_mask & !(1 << (x - 1))))?);
        }
        if w.len() < target.len() {
            return Err(Error::Contract(format!(
                "message for {} shorter than its chunk",
                SubsetId::from_mask(partition.users, a_mask)
            )));
        }
        for (&p, b) in target.iter().zip(w.iter().by_vals()) {
            out.set(p as usize, b);
        }
    }
    Ok(out)
}

/// Decodes every user in parallel; entry `k - 1` is user `k`'s file.
pub fn decode_all_decentralized(
    db: &Database,
    placement: &Placement,
    partition: &LevelPartition,
    messages: &[BroadcastMessage],
    d: &Demand,
) -> Result<Vec<Bits>> {
    (1..=partition.users)
        .into_par_iter()
        .map(|k| decode_user_decentralized(k, partition, &placement.cache_of(db, k), messages, d))
        .collect()
}

/// Transmitted bits over `F`.
pub fn empirical_rate(messages: &[BroadcastMessage], file_bits: usize) -> Rational {
    crate::centralized::delivered_rate(messages, file_bits)
}

fn check_demand(partition: &LevelPartition, d: &Demand) -> Result<()> {
    if d.users() != partition.users || d.files() != partition.files {
        return Err(Error::Contract(format!(
            "demand for {} users / {} files does not match partition with {} users / {} files",
            d.users(),
            d.files(),
            partition.users,
            partition.files
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centralized::{batch_placement, decode_all, encode_delivery};
    use crate::combinatorics::{choose, rational, rational_int};

    #[test]
    fn random_placement_extremes() {
        let full = random_placement(2, 3, &rational_int(2), 50, 1).unwrap();
        assert!((1..=3).all(|k| full.cached_bits(k) == 100));
        let none = random_placement(2, 3, &rational_int(0), 50, 1).unwrap();
        assert!((1..=3).all(|k| none.cached_bits(k) == 0));
        assert!(random_placement(2, 3, &rational_int(3), 50, 1).is_err());
    }

    #[test]
    fn random_placement_quota_and_frequency() {
        let f = 10_000;
        let p = random_placement(2, 3, &rational_int(1), f, 11).unwrap();
        for k in 1..=3 {
            for i in 1..=2 {
                assert_eq!((0..f).filter(|&b| p.is_cached(k, i, b)).count(), 5_000);
            }
        }
        let masks = p.caching_masks();
        let user1 = masks.iter().filter(|&&m| m & 1 == 1).count() as f64 / (2 * f) as f64;
        assert!((user1 - 0.5).abs() < 0.02);
        assert_eq!(random_placement(2, 3, &rational_int(1), f, 11).unwrap(), p);
    }

    #[test]
    fn quota_is_floored() {
        // M F / N = 1 * 7 / 2 = 3.5 -> 3 bits per file
        let p = random_placement(2, 2, &rational_int(1), 7, 0).unwrap();
        assert_eq!(p.cached_bits(1), 6);
        let p = random_placement(3, 2, &rational(1, 2), 10, 0).unwrap();
        assert_eq!(p.cached_bits(2), 3);
    }

    #[test]
    fn partition_of_batch_placement_is_single_level() {
        let p = batch_placement(2, 4, 2, 12).unwrap();
        let part = level_partition(&p);
        assert_eq!(part.level_sizes(), vec![0, 0, 24, 0, 0]);
        assert_eq!(part.level(2).count() as u64, choose(4, 2));
        for (s, g) in part.level(2) {
            let range = p.batch_view().unwrap().range(s.rank());
            let expect: Vec<u32> = range.map(|b| b as u32).collect();
            assert_eq!(g[0], expect);
            assert_eq!(g[1], expect);
        }
    }

    #[test]
    fn partition_of_empty_placement() {
        let p = random_placement(3, 2, &rational_int(0), 20, 0).unwrap();
        assert_eq!(level_partition(&p).level_sizes(), vec![60, 0, 0]);
    }

    #[test]
    fn partition_is_exact_and_recombines() {
        let p = random_placement(2, 3, &rational_int(1), 300, 5).unwrap();
        let part = level_partition(&p);
        assert_eq!(part.level_sizes().iter().sum::<usize>(), 600);
        let p = &p;
        for k in 1..=3 {
            let from_part = part.cached_by(k);
            let direct: Vec<(usize, u32)> = (1..=2)
                .flat_map(|i| (0..300).filter(move |&b| p.is_cached(k, i, b)).map(move |b| (i, b as u32)))
                .collect();
            assert_eq!(from_part, direct);
        }
        for (s, g) in part.level(2) {
            for (i, pos) in g.iter().enumerate() {
                assert!(pos.iter().all(|&b| p.caching_mask(i + 1, b as usize) == s.mask()));
            }
        }
    }

    #[test]
    fn level_sizes_concentrate() {
        // each bit is cached by Binomial(3, 1/2) users, approximately
        let p = random_placement(2, 3, &rational_int(1), 300, 9).unwrap();
        let sizes = level_partition(&p).level_sizes();
        let n = 600.0;
        for (j, &size) in sizes.iter().enumerate() {
            let prob = choose(3, j) as f64 / 8.0;
            let sigma = (n * prob * (1.0 - prob)).sqrt();
            assert!((size as f64 - n * prob).abs() <= 3.0 * sigma, "level {j}: {size}");
        }
    }

    #[test]
    fn reduces_to_centralized_on_batch_placement() {
        let (n, k, t, f) = (3, 4, 2, 12);
        let p = batch_placement(n, k, t, f).unwrap();
        let part = level_partition(&p);
        let db = Database::generate(n, f, 3);
        for d in Demand::all(n, k) {
            let central = encode_delivery(&db, &p, &d).unwrap();
            let dec = encode_delivery_decentralized(&db, &part, &d).unwrap();
            assert_eq!(central, dec);
            let a = decode_all(&db, &p, &central, &d).unwrap();
            let b = decode_all_decentralized(&db, &p, &part, &dec, &d).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn full_cache_sends_nothing() {
        let p = random_placement(2, 3, &rational_int(2), 40, 2).unwrap();
        let part = level_partition(&p);
        let db = Database::generate(2, 40, 2);
        let d = Demand::new(vec![1, 2, 2], 2).unwrap();
        let msgs = encode_delivery_decentralized(&db, &part, &d).unwrap();
        assert!(msgs.is_empty());
        assert_eq!(empirical_rate(&msgs, 40), rational_int(0));
        let out = decode_all_decentralized(&db, &p, &part, &msgs, &d).unwrap();
        assert_eq!(out[2], db.file(2).to_bitvec());
    }

    #[test]
    fn empty_cache_sends_each_distinct_file() {
        let p = random_placement(3, 4, &rational_int(0), 64, 2).unwrap();
        let part = level_partition(&p);
        let db = Database::generate(3, 64, 2);
        let d = Demand::new(vec![2, 2, 3, 2], 3).unwrap();
        let msgs = encode_delivery_decentralized(&db, &part, &d).unwrap();
        assert_eq!(empirical_rate(&msgs, 64), rational_int(2));
    }

    #[test]
    fn all_demands_decode_small_instance() {
        let (n, k, f) = (2, 3, 600);
        let p = random_placement(n, k, &rational_int(1), f, 17).unwrap();
        let part = level_partition(&p);
        let db = Database::generate(n, f, 17);
        for d in Demand::all(n, k) {
            let msgs = encode_delivery_decentralized(&db, &part, &d).unwrap();
            let out = decode_all_decentralized(&db, &p, &part, &msgs, &d).unwrap();
            for (u, file) in out.iter().enumerate() {
                assert_eq!(file.as_bitslice(), db.file(d.file_of(u + 1)), "demand {d:?} user {}", u + 1);
            }
        }
    }

    #[test]
    fn missing_level_message_is_reported() {
        let p = random_placement(2, 3, &rational_int(1), 200, 4).unwrap();
        let part = level_partition(&p);
        let db = Database::generate(2, 200, 4);
        let d = Demand::new(vec![1, 2, 1], 2).unwrap();
        let mut msgs = encode_delivery_decentralized(&db, &part, &d).unwrap();
        msgs.retain(|m| m.subset.len() != 2);
        let failed = (1..=3)
            .map(|u| decode_user_decentralized(u, &part, &p.cache_of(&db, u), &msgs, &d))
            .filter(|r| matches!(r, Err(Error::MissingMessage { .. })))
            .count();
        assert!(failed > 0);
    }

    #[test]
    fn padding_is_counted() {
        let p = random_placement(2, 3, &rational_int(1), 200, 4).unwrap();
        let part = level_partition(&p);
        let db = Database::generate(2, 200, 4);
        let d = Demand::new(vec![1, 2, 1], 2).unwrap();
        let msgs = encode_delivery_decentralized(&db, &part, &d).unwrap();
        let lead = select_leaders(&d).mask();
        let useful: usize = enumerate_subsets(3, 1)
            .unwrap()
            .into_iter()
            .chain(enumerate_subsets(3, 2).unwrap())
            .chain(enumerate_subsets(3, 3).unwrap())
            .filter(|a| a.mask() & lead != 0)
            .map(|a| members(a.mask()).map(|x| part.group(d.file_of(x), a.mask() & !(1 << (x - 1))).len()).sum::<usize>())
            .sum();
        // every sent bit position carries |A| chunk bits, real or padding
        let slots: usize = msgs.iter().map(|m| m.payload.len() * m.subset.len()).sum();
        assert_eq!(slots, useful + padding_bits(&part, &d).unwrap());
        let sent: usize = msgs.iter().map(|m| m.payload.len()).sum();
        assert_eq!(delivery_bits(&part, &d).unwrap(), sent);
    }
}
