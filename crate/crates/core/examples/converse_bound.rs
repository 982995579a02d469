//! Lower bound per demand type for a few placements, next to what the
//! level-partitioned delivery actually sends on the same placement.
//!
//!     cargo run --release --example converse_bound

use std::collections::BTreeMap;

use cachekit::centralized::batch_placement;
use cachekit::combinatorics::{rational, Rational};
use cachekit::decentralized::{delivery_bits, level_partition, random_placement};
use cachekit::model::{demand_stats, enumerate_types, Demand, Placement};
use cachekit::rate_analysis::{converse_bound, CacheProfile};
use num_traits::Zero;

fn report(name: &str, placement: &Placement) -> cachekit::Result<()> {
    let profile = CacheProfile::from_placement(placement);
    let partition = level_partition(placement);
    let mut sums = BTreeMap::new();
    for d in Demand::all(placement.files(), placement.users()) {
        let e = sums.entry(demand_stats(&d)).or_insert((0usize, 0usize));
        e.0 += delivery_bits(&partition, &d)?;
        e.1 += 1;
    }
    println!("{name}: a_n = {:?}", profile.counts());
    for s in enumerate_types(placement.files(), placement.users()) {
        let (bits, n) = sums[&s];
        let achieved = Rational::new(bits.into(), (n * placement.file_bits()).into());
        let bound = converse_bound(&profile, &s, &Rational::zero())?;
        println!("  type {:?}: bound {bound}, achieved {achieved}", s.counts());
    }
    Ok(())
}

fn main() -> cachekit::Result<()> {
    let (files, users, file_bits) = (3, 4, 120);
    report("batch t=2", &batch_placement(files, users, 2, file_bits)?)?;
    report("random M=3/2", &random_placement(files, users, &rational(3, 2), file_bits, 5)?)?;
    Ok(())
}
