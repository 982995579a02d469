//! Demand types, their sizes, and the law of the number of distinct
//! requested files.
//!
//!     cargo run --example demand_statistics

use cachekit::combinatorics::{enumerate_subsets, surjection_count, to_f64};
use cachekit::model::{enumerate_types, ne_distribution};

fn main() -> cachekit::Result<()> {
    let (files, users) = (3, 4);
    for s in enumerate_types(files, users) {
        println!("type {:?}: N_e = {}, {} demands", s.counts(), s.n_e(), s.type_size());
    }
    let dist = ne_distribution(files, users)?;
    for (e, p) in dist.probs() {
        println!("P(N_e = {e}) = {p}  (surjections {})", surjection_count(users as u32, *e as u32));
    }
    println!("E[N_e] = {} = {:.4}", dist.mean(), to_f64(&dist.mean()));

    let subsets = enumerate_subsets(5, 2)?;
    let listed: Vec<String> = subsets.iter().map(|s| format!("{}:{s}", s.rank())).collect();
    println!("2-subsets of 5 users: {}", listed.join(" "));
    Ok(())
}
