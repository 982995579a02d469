use cachekit::bits::Bits;
use cachekit::centralized::{batch_placement, decode_all, delivered_rate, encode_delivery};
use cachekit::combinatorics::{binomial, enumerate_subsets, rational, Rational, SubsetId};
use cachekit::decentralized::{
    decode_all_decentralized, delivery_bits, encode_delivery_decentralized, level_partition, random_placement,
};
use cachekit::model::{demand_stats, Database, Demand, Placement};
use cachekit::rate_analysis::{converse_bound, dec_level_sum, dec_rate_for, CacheProfile};
use num_traits::Zero;
use proptest::prelude::*;

/// `(N, K, t, demand)` with `K <= 7`.
fn centralized_case() -> impl Strategy<Value = (usize, usize, usize, Vec<usize>)> {
    (1usize..=4, 1usize..=7)
        .prop_flat_map(|(n, k)| (Just(n), Just(k), 0..=k, prop::collection::vec(1..=n, k)))
}

fn relabel_users(d: &Demand, perm: &[usize]) -> Demand {
    // user perm[k] of the new system asks for what user k asked for
    let mut requests = vec![0; d.users()];
    for (k, &p) in perm.iter().enumerate() {
        requests[p] = d.file_of(k + 1);
    }
    Demand::new(requests, d.files()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centralized_decodes_every_demand((n, k, t, req) in centralized_case(), seed in any::<u64>(), mult in 1usize..=3) {
        let f = mult * binomial(k as u64, t as u64).unwrap() as usize;
        let db = Database::generate(n, f, seed);
        let placement = batch_placement(n, k, t, f).unwrap();
        let d = Demand::new(req, n).unwrap();
        let msgs = encode_delivery(&db, &placement, &d).unwrap();
        let files = decode_all(&db, &placement, &msgs, &d).unwrap();
        for (u, w) in files.iter().enumerate() {
            prop_assert_eq!(w.as_bitslice(), db.file(d.file_of(u + 1)));
        }
    }

    #[test]
    fn rate_is_invariant_under_relabelling(
        (n, k, t, req) in centralized_case(),
        perm_seed in any::<u64>(),
        shift in 0usize..4,
    ) {
        let f = binomial(k as u64, t as u64).unwrap() as usize;
        let db = Database::generate(n, f, perm_seed);
        let placement = batch_placement(n, k, t, f).unwrap();
        let d = Demand::new(req, n).unwrap();
        let base = delivered_rate(&encode_delivery(&db, &placement, &d).unwrap(), f);

        let mut perm: Vec<usize> = (0..k).collect();
        let mut state = perm_seed;
        for i in (1..k).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let users = relabel_users(&d, &perm);
        let files = Demand::new(d.requests().iter().map(|&x| (x - 1 + shift) % n + 1).collect(), n).unwrap();
        for other in [users, files] {
            prop_assert_eq!(demand_stats(&other).n_e(), d.distinct());
            let msgs = encode_delivery(&db, &placement, &other).unwrap();
            prop_assert_eq!(delivered_rate(&msgs, f), base.clone());
            let decoded = decode_all(&db, &placement, &msgs, &other).unwrap();
            for (u, w) in decoded.iter().enumerate() {
                prop_assert_eq!(w.as_bitslice(), db.file(other.file_of(u + 1)));
            }
        }
    }

    #[test]
    fn decentralized_decodes_any_file_size(
        n in 1usize..=3,
        k in 1usize..=5,
        m_quarters in 0i64..=12,
        f in 1usize..=90,
        seed in any::<u64>(),
        req_seed in any::<u64>(),
    ) {
        let m = rational(m_quarters.min(4 * n as i64), 4);
        let db = Database::generate(n, f, seed);
        let placement = random_placement(n, k, &m, f, seed).unwrap();
        let partition = level_partition(&placement);
        let req: Vec<usize> = (0..k).map(|i| ((req_seed >> (3 * i)) as usize % n) + 1).collect();
        let d = Demand::new(req, n).unwrap();
        let msgs = encode_delivery_decentralized(&db, &partition, &d).unwrap();
        prop_assert_eq!(msgs.iter().map(|m| m.payload.len()).sum::<usize>(), delivery_bits(&partition, &d).unwrap());
        let files = decode_all_decentralized(&db, &placement, &partition, &msgs, &d).unwrap();
        for (u, w) in files.iter().enumerate() {
            prop_assert_eq!(w.as_bitslice(), db.file(d.file_of(u + 1)));
        }
    }

    #[test]
    fn converse_never_exceeds_achieved(
        picks in prop::collection::vec(prop::collection::vec(any::<bool>(), 2 * 8), 3),
    ) {
        // arbitrary placement: N = 2, K = 3, F = 8, budget M = 2
        let cached: Vec<Bits> = picks.iter().map(|p| p.iter().copied().collect()).collect();
        let placement = Placement::new(2, 8, rational(2, 1), cached).unwrap();
        let profile = CacheProfile::from_placement(&placement);
        let partition = level_partition(&placement);
        let mut sums = std::collections::BTreeMap::new();
        for d in Demand::all(2, 3) {
            let e = sums.entry(demand_stats(&d)).or_insert((0usize, 0usize));
            e.0 += delivery_bits(&partition, &d).unwrap();
            e.1 += 1;
        }
        for (s, (bits, count)) in sums {
            let achieved = rational(bits as i64, (count * 8) as i64);
            let bound = converse_bound(&profile, &s, &Rational::zero()).unwrap();
            prop_assert!(bound <= achieved, "{:?}: {} > {}", s.counts(), bound, achieved);
        }
    }

    #[test]
    fn placement_text_roundtrips(n in 1usize..=3, k in 1usize..=5, f in 1usize..=20, q in 0i64..=3, seed in any::<u64>()) {
        let m = rational(q.min(n as i64), 1);
        let placement = random_placement(n, k, &m, f, seed).unwrap();
        let parsed = Placement::parse(&placement.to_text()).unwrap();
        prop_assert_eq!(parsed.caching_masks(), placement.caching_masks());
        prop_assert_eq!(parsed.memory(), placement.memory());
        prop_assert_eq!(parsed.to_text(), placement.to_text());
    }

    #[test]
    fn subset_rank_roundtrips(k in 1usize..=20, seed in any::<u64>()) {
        let size = (seed as usize) % (k + 1);
        let total = binomial(k as u64, size as u64).unwrap();
        let rank = (seed >> 8) % total;
        let s = SubsetId::unrank(k, size, rank).unwrap();
        prop_assert_eq!(s.rank(), rank);
        prop_assert_eq!(s.len(), size);
        let again = SubsetId::from_members(k, s.members()).unwrap();
        prop_assert_eq!(again, s.clone());
        if k <= 12 {
            prop_assert_eq!(&enumerate_subsets(k, size).unwrap()[rank as usize], &s);
        }
    }

    #[test]
    fn level_sum_matches_closed_form(n in 1usize..=6, num in 0i64..=60, extra in 0usize..=4, n_e in 1usize..=4) {
        let m = rational(num.min(10 * n as i64), 10);
        let closed = dec_rate_for(n, &m, n_e).unwrap();
        prop_assert_eq!(dec_level_sum(n, &m, n_e + extra, n_e).unwrap(), closed);
    }
}
