//! The message the server skips can be rebuilt from the ones it sends.
//!
//!     cargo run --example lemma_reconstruction

use cachekit::centralized::{
    batch_placement, encode_delivery, exchange_message, reconstruct_message, select_leaders, verify_lemma1,
};
use cachekit::combinatorics::SubsetId;
use cachekit::model::{Database, Demand};

fn main() -> cachekit::Result<()> {
    let db = Database::generate(3, 30, 9);
    let placement = batch_placement(3, 6, 2, 30)?;
    let demand = Demand::new(vec![1, 1, 2, 2, 3, 3], 3)?;
    let leaders = select_leaders(&demand);
    let sent = encode_delivery(&db, &placement, &demand)?;

    let skipped = SubsetId::from_members(6, &[2, 4, 6])?;
    let rebuilt = reconstruct_message(&sent, &demand, &leaders, &skipped)?;
    let direct = exchange_message(&db, &placement, &demand, &skipped)?;
    println!("Y_{skipped}: rebuilt == direct: {}", rebuilt == direct);

    let b = SubsetId::from_members(6, &[1, 2, 3, 4, 5, 6])?;
    println!("XOR over B = {b} vanishes: {}", verify_lemma1(&db, &placement, &demand, &leaders, &b)?);
    Ok(())
}
