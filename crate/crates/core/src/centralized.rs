//! Symmetric batch prefetching with leader-based XOR delivery.
//!
//! For a `t`-subset `S` of users, `W_{i,S}` is the subfile of file `i` cached
//! exactly by the users in `S`. For a `(t+1)`-subset `A` the exchange message
//! is `Y_A = XOR_{x in A} W_{d_x, A \ {x}}`. The server sends `Y_A` only when
//! `A` contains a leader; every other `Y_A` is the XOR of sent messages by
//! the identity checked in [`verify_lemma1`].

use std::collections::HashMap;

use rayon::prelude::*;

use crate::bits::{xor_padded, zeros, Bits, BitsSlice};
use crate::combinatorics::{choose, enumerate_subsets, rank_of_mask, Rational, SubsetId, MAX_USERS};
use crate::error::{Error, Result};
use crate::model::{ratio_usize, BatchView, Database, Demand, Placement, UserCache};

/// One coded transmission: the subset it serves and its XOR payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BroadcastMessage {
    pub subset: SubsetId,
    pub payload: Bits,
}

/// One user per distinct requested file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaderSet {
    leaders: Vec<usize>,
}

impl LeaderSet {
    /// Checks that the users request pairwise distinct files covering `d`.
    pub fn new(mut leaders: Vec<usize>, d: &Demand) -> Result<Self> {
        leaders.sort_unstable();
        leaders.dedup();
        if leaders.iter().any(|&u| u == 0 || u > d.users()) {
            return Err(Error::Domain(format!("leaders {leaders:?} outside 1..={}", d.users())));
        }
        let mut files: Vec<usize> = leaders.iter().map(|&u| d.file_of(u)).collect();
        files.sort_unstable();
        files.dedup();
        if files.len() != leaders.len() || files.len() != d.distinct() {
            return Err(Error::Domain(format!("{leaders:?} is not one user per requested file")));
        }
        Ok(LeaderSet { leaders })
    }

    pub fn users(&self) -> &[usize] {
        &self.leaders
    }

    pub fn mask(&self) -> u64 {
        self.leaders.iter().fold(0, |m, &u| m | 1 << (u - 1))
    }

    pub fn contains(&self, user: usize) -> bool {
        self.leaders.binary_search(&user).is_ok()
    }
}

/// Splits every file into `C(K,t)` equal subfiles; user `k` caches those
/// indexed by subsets containing `k`.
pub fn batch_placement(files: usize, users: usize, t: usize, file_bits: usize) -> Result<Placement> {
    if users == 0 || users > MAX_USERS {
        return Err(Error::Domain(format!("user count must be in 1..={MAX_USERS}")));
    }
    if t > users {
        return Err(Error::Domain(format!("t = {t} exceeds K = {users}")));
    }
    let subfiles = choose(users, t);
    if file_bits == 0 || !(file_bits as u64).is_multiple_of(subfiles) {
        return Err(Error::Precondition(format!(
            "F = {file_bits} must be a positive multiple of C({users},{t}) = {subfiles}"
        )));
    }
    let view = BatchView { t, subfile_bits: file_bits / subfiles as usize, subfiles };
    let mut cached = vec![zeros(files * file_bits); users];
    for s in enumerate_subsets(users, t)? {
        let range = view.range(s.rank());
        for &k in s.members() {
            for i in 0..files {
                cached[k - 1][i * file_bits + range.start..i * file_bits + range.end].fill(true);
            }
        }
    }
    let memory = ratio_usize(files * t, users);
    Ok(Placement::new(files, file_bits, memory, cached)?.with_batch(view))
}

/// Lowest-indexed requester of each distinct file.
pub fn select_leaders(d: &Demand) -> LeaderSet {
    let mut seen = vec![false; d.files() + 1];
    let leaders = (1..=d.users())
        .filter(|&u| !std::mem::replace(&mut seen[d.file_of(u)], true))
        .collect();
    LeaderSet { leaders }
}

fn view_of(placement: &Placement) -> Result<&BatchView> {
    placement
        .batch_view()
        .ok_or_else(|| Error::Contract("placement has no batch structure".into()))
}

fn check_demand(placement: &Placement, d: &Demand) -> Result<()> {
    if d.users() != placement.users() || d.files() != placement.files() {
        return Err(Error::Contract(format!(
            "demand for {} users / {} files does not match placement with {} users / {} files",
            d.users(),
            d.files(),
            placement.users(),
            placement.files()
        )));
    }
    Ok(())
}

/// `(d_x, A \ {x})` for every `x in A`, largest `x` first.
pub fn exchange_terms(d: &Demand, subset: &SubsetId) -> Vec<(usize, SubsetId)> {
    let users = d.users();
    subset
        .members()
        .iter()
        .rev()
        .map(|&x| (d.file_of(x), SubsetId::from_mask(users, subset.mask() & !(1 << (x - 1)))))
        .collect()
}

/// Human-readable `Y_A` composition with files lettered `A`, `B`, ...,
/// e.g. `B_{1,2} + A_{1,3} + A_{2,3}`.
pub fn render_composition(d: &Demand, subset: &SubsetId) -> String {
    let parts: Vec<String> = exchange_terms(d, subset)
        .into_iter()
        .map(|(file, s)| format!("{}_{{{}}}", file_letter(file), s.to_csv()))
        .collect();
    parts.join(" + ")
}

fn file_letter(file: usize) -> String {
    if file <= 26 {
        char::from(b'A' + (file - 1) as u8).to_string()
    } else {
        format!("F{file}")
    }
}

fn subfile<'a>(db: &'a Database, view: &BatchView, file: usize, subset: &SubsetId) -> &'a BitsSlice {
    &db.file(file)[view.range(subset.rank())]
}

/// `Y_A` computed directly from the database. A subset whose size is not
/// `t + 1` indexes no subfiles, so its message is the zero vector.
pub fn exchange_message(db: &Database, placement: &Placement, d: &Demand, subset: &SubsetId) -> Result<Bits> {
    let view = view_of(placement)?;
    check_demand(placement, d)?;
    let mut acc = zeros(view.subfile_bits);
    if subset.len() != view.t + 1 {
        return Ok(acc);
    }
    for (file, s) in exchange_terms(d, subset) {
        acc ^= subfile(db, view, file, &s);
    }
    Ok(acc)
}

/// Broadcasts `Y_A` for every `(t+1)`-subset meeting the leader set, in
/// subset enumeration order.
pub fn encode_delivery(db: &Database, placement: &Placement, d: &Demand) -> Result<Vec<BroadcastMessage>> {
    encode_delivery_with_leaders(db, placement, d, &select_leaders(d))
}

pub fn encode_delivery_with_leaders(
    db: &Database,
    placement: &Placement,
    d: &Demand,
    leaders: &LeaderSet,
) -> Result<Vec<BroadcastMessage>> {
    let view = view_of(placement)?;
    check_demand(placement, d)?;
    let users = placement.users();
    if view.t == users {
        return Ok(Vec::new());
    }
    let lead = leaders.mask();
    enumerate_subsets(users, view.t + 1)?
        .into_iter()
        .filter(|a| a.mask() & lead != 0)
        .map(|a| {
            let payload = exchange_message(db, placement, d, &a)?;
            Ok(BroadcastMessage { subset: a, payload })
        })
        .collect()
}

/// Payloads by subset mask. Subsets of the expected size sit in a table
/// indexed by rank; anything else goes to a map.
struct MessageIndex<'a> {
    users: usize,
    size: usize,
    slots: Vec<Option<&'a Bits>>,
    other: HashMap<u64, &'a Bits>,
}

impl<'a> MessageIndex<'a> {
    const MAX_SLOTS: u64 = 1 << 22;

    fn new(users: usize, size: usize) -> Self {
        let count = if size <= users { choose(users, size) } else { 0 };
        let slots = if count <= Self::MAX_SLOTS { vec![None; count as usize] } else { Vec::new() };
        MessageIndex { users, size, slots, other: HashMap::new() }
    }

    fn slot(&self, mask: u64) -> Option<usize> {
        (!self.slots.is_empty() && mask.count_ones() as usize == self.size && mask >> self.users == 0)
            .then(|| rank_of_mask(self.users, mask) as usize)
    }

    fn insert(&mut self, mask: u64, payload: &'a Bits) {
        match self.slot(mask) {
            Some(i) => self.slots[i] = Some(payload),
            None => {
                self.other.insert(mask, payload);
            }
        }
    }

    fn get(&self, mask: u64) -> Option<&'a Bits> {
        match self.slot(mask) {
            Some(i) => self.slots[i],
            None => self.other.get(&mask).copied(),
        }
    }
}

fn index_messages(users: usize, size: usize, messages: &[BroadcastMessage]) -> MessageIndex<'_> {
    let mut index = MessageIndex::new(users, size);
    for m in messages {
        index.insert(m.subset.mask(), &m.payload);
    }
    index
}

/// Subsets `V` of `B` holding exactly one requester of every requested file,
/// as masks.
pub(crate) fn one_per_file_family(d: &Demand, b_mask: u64, leaders: &LeaderSet) -> Vec<u64> {
    let mut out = Vec::new();
    let _ = for_each_family(d, b_mask, leaders, |v| {
        out.push(v);
        Ok(())
    });
    out
}

/// Calls `visit` on every mask [`one_per_file_family`] returns, in the same order.
fn for_each_family(d: &Demand, b_mask: u64, leaders: &LeaderSet, mut visit: impl FnMut(u64) -> Result<()>) -> Result<()> {
    let groups: Vec<u64> = leaders
        .users()
        .iter()
        .map(|&u| {
            let f = d.file_of(u);
            let mut group = 0;
            let mut rest = b_mask;
            while rest != 0 {
                let x = rest.trailing_zeros() as usize + 1;
                rest &= rest - 1;
                if d.file_of(x) == f {
                    group |= 1 << (x - 1);
                }
            }
            group
        })
        .collect();
    fn walk(groups: &[u64], chosen: u64, visit: &mut dyn FnMut(u64) -> Result<()>) -> Result<()> {
        let Some((&first, rest)) = groups.split_first() else {
            return visit(chosen);
        };
        let mut left = first;
        while left != 0 {
            let bit = left & left.wrapping_neg();
            left &= left - 1;
            walk(rest, chosen | bit, visit)?;
        }
        Ok(())
    }
    walk(&groups, 0, &mut visit)
}

pub(crate) fn reconstruct_with<'a>(
    lookup: impl Fn(u64) -> Result<&'a BitsSlice>,
    d: &Demand,
    leaders: &LeaderSet,
    subset: &SubsetId,
) -> Result<Bits> {
    let lead = leaders.mask();
    if subset.mask() & lead != 0 {
        return Err(Error::Contract(format!("{subset} contains a leader; its message is broadcast")));
    }
    let b_mask = subset.mask() | lead;
    let mut acc = Bits::new();
    for_each_family(d, b_mask, leaders, |v| {
        if v != lead {
            xor_padded(&mut acc, lookup(b_mask & !v)?);
        }
        Ok(())
    })?;
    Ok(acc)
}

fn reconstruct_indexed(
    index: &MessageIndex,
    d: &Demand,
    leaders: &LeaderSet,
    subset: &SubsetId,
) -> Result<Bits> {
    let lookup = |key: u64| {
        index
            .get(key)
            .map(|b| b.as_bitslice())
            .ok_or_else(|| Error::MissingMessage { subset: SubsetId::from_mask(d.users(), key) })
    };
    reconstruct_with(lookup, d, leaders, subset)
}

/// Rebuilds a withheld `Y_A` (`A` free of leaders) as the XOR of
/// `Y_{B \ V}` over the one-requester-per-file families `V != U` of
/// `B = A ∪ U`.
pub fn reconstruct_message(
    messages: &[BroadcastMessage],
    d: &Demand,
    leaders: &LeaderSet,
    subset: &SubsetId,
) -> Result<Bits> {
    reconstruct_indexed(&index_messages(d.users(), subset.len(), messages), d, leaders, subset)
}

/// Result of decoding for one user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeReport {
    pub file: Bits,
    /// Messages this user had to rebuild because they were not broadcast.
    pub reconstructed: Vec<SubsetId>,
}

/// Recovers `W_{d_k}` for user `k` from its cache and the broadcast.
pub fn decode_user(
    user: usize,
    placement: &Placement,
    cache: &UserCache,
    messages: &[BroadcastMessage],
    d: &Demand,
    leaders: &LeaderSet,
) -> Result<Bits> {
    decode_user_report(user, placement, cache, messages, d, leaders).map(|r| r.file)
}

pub fn decode_user_report(
    user: usize,
    placement: &Placement,
    cache: &UserCache,
    messages: &[BroadcastMessage],
    d: &Demand,
    leaders: &LeaderSet,
) -> Result<DecodeReport> {
    let t = view_of(placement)?.t;
    let subfiles = enumerate_subsets(placement.users(), t)?;
    let index = index_messages(placement.users(), t + 1, messages);
    decode_indexed(user, placement, &subfiles, cache, &index, d, leaders)
}

fn decode_indexed(
    user: usize,
    placement: &Placement,
    subfiles: &[SubsetId],
    cache: &UserCache,
    index: &MessageIndex,
    d: &Demand,
    leaders: &LeaderSet,
) -> Result<DecodeReport> {
    let view = view_of(placement)?;
    check_demand(placement, d)?;
    if cache.user() != user {
        return Err(Error::Contract(format!("cache of user {} used for user {user}", cache.user())));
    }
    let users = placement.users();
    let wanted = d.file_of(user);
    let lead = leaders.mask();
    let mut reconstructed = Vec::new();
    let mut out = Bits::with_capacity(placement.file_bits());
    let own = 1u64 << (user - 1);
    for s in subfiles {
        let range = view.range(s.rank());
        if s.contains(user) {
            out.extend_from_bitslice(cache.slice(wanted, range)?);
            continue;
        }
        let a_mask = s.mask() | own;
        let rebuilt;
        let y = match index.get(a_mask) {
            Some(y) => y.as_bitslice(),
            None if a_mask & lead == 0 => {
                let a = SubsetId::from_mask(users, a_mask);
                rebuilt = reconstruct_indexed(index, d, leaders, &a)?;
                reconstructed.push(a);
                rebuilt.as_bitslice()
            }
            None => return Err(Error::MissingMessage { subset: SubsetId::from_mask(users, a_mask) }),
        };
        if y.len() != view.subfile_bits {
            let a = SubsetId::from_mask(users, a_mask);
            return Err(Error::Contract(format!("message {a} has {} bits, expected {}", y.len(), view.subfile_bits)));
        }
        let start = out.len();
        out.extend_from_bitslice(y);
        let mut others = s.mask();
        while others != 0 {
            let x = others.trailing_zeros() as usize + 1;
            others &= others - 1;
            let rank = rank_of_mask(users, a_mask & !(1 << (x - 1)));
            out[start..] ^= cache.slice(d.file_of(x), view.range(rank))?;
        }
    }
    Ok(DecodeReport { file: out, reconstructed })
}

/// Decodes every user; entry `k - 1` is user `k`'s file. The withheld
/// messages are rebuilt once and shared, instead of once per user.
pub fn decode_all(db: &Database, placement: &Placement, messages: &[BroadcastMessage], d: &Demand) -> Result<Vec<Bits>> {
    let caches: Vec<UserCache> = (1..=placement.users()).into_par_iter().map(|k| placement.cache_of(db, k)).collect();
    decode_all_cached(placement, &caches, messages, d)
}

/// [`decode_all`] with the caches built beforehand; `caches[k - 1]` is user `k`'s.
pub fn decode_all_cached(
    placement: &Placement,
    caches: &[UserCache],
    messages: &[BroadcastMessage],
    d: &Demand,
) -> Result<Vec<Bits>> {
    if caches.len() != placement.users() {
        return Err(Error::Contract(format!("{} caches for {} users", caches.len(), placement.users())));
    }
    let view = view_of(placement)?;
    check_demand(placement, d)?;
    let users = placement.users();
    let leaders = select_leaders(d);
    let lead = leaders.mask();
    let sent = index_messages(users, view.t + 1, messages);
    let missing: Vec<SubsetId> = if view.t < users {
        masks_of_size(users, view.t + 1)
            .filter(|&a| a & lead == 0 && sent.get(a).is_none())
            .map(|a| SubsetId::from_mask(users, a))
            .collect()
    } else {
        Vec::new()
    };
    // already inside a pool (e.g. one demand of many): stay on this thread
    let nested = rayon::current_thread_index().is_some();
    let rebuild = |a: &SubsetId| Ok((a.mask(), reconstruct_indexed(&sent, d, &leaders, a)?));
    let rebuilt: Vec<(u64, Bits)> = if nested {
        missing.iter().map(rebuild).collect::<Result<_>>()?
    } else {
        missing.par_iter().map(rebuild).collect::<Result<_>>()?
    };
    let mut index = sent;
    for (m, b) in &rebuilt {
        index.insert(*m, b);
    }
    let subfiles = enumerate_subsets(users, view.t)?;
    let decode = |k: usize| decode_indexed(k, placement, &subfiles, &caches[k - 1], &index, d, &leaders).map(|r| r.file);
    if nested {
        (1..=users).map(decode).collect()
    } else {
        (1..=users).into_par_iter().map(decode).collect()
    }
}

/// Masks over `users` bits with exactly `size` ones, in increasing order.
fn masks_of_size(users: usize, size: usize) -> impl Iterator<Item = u64> {
    let limit = if users == 64 { u64::MAX } else { (1u64 << users) - 1 };
    let first = if size == 0 { 0 } else { u64::MAX >> (64 - size) };
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let m = next?;
        // Gosper's hack; stops once the mask leaves the user range or overflows
        next = if m == 0 {
            None
        } else {
            let c = m & m.wrapping_neg();
            m.checked_add(c).map(|r| (((r ^ m) >> 2) / c) | r).filter(|&n| n <= limit && n > m)
        };
        Some(m)
    })
    .take_while(move |&m| m <= limit)
}

/// Checks `XOR_{V in V_F} Y_{B \ V} = 0` with every `Y` computed directly.
pub fn verify_lemma1(
    db: &Database,
    placement: &Placement,
    d: &Demand,
    leaders: &LeaderSet,
    b: &SubsetId,
) -> Result<bool> {
    let lead = leaders.mask();
    if b.mask() & lead != lead {
        return Err(Error::Precondition(format!("{b} does not contain every leader")));
    }
    let users = placement.users();
    let mut acc = Bits::new();
    for v in one_per_file_family(d, b.mask(), leaders) {
        let y = exchange_message(db, placement, d, &SubsetId::from_mask(users, b.mask() & !v))?;
        xor_padded(&mut acc, &y);
    }
    Ok(acc.not_any())
}

/// Total payload bits over `F`.
pub fn delivered_rate(messages: &[BroadcastMessage], file_bits: usize) -> Rational {
    ratio_usize(messages.iter().map(|m| m.payload.len()).sum(), file_bits)
}

/// Transcript line `members : hex`, one per message.
pub fn transcript(messages: &[BroadcastMessage]) -> String {
    messages
        .iter()
        .map(|m| format!("{} : {}\n", m.subset.to_csv(), crate::bits::to_hex(&m.payload)))
        .collect()
}
