//! Three files, six users, each user caches a third of the library (t = 2).
//! Users 1,2 want A, users 3,4 want B, users 5,6 want C.
//!
//!     cargo run --example motivating_example

use cachekit::centralized::{
    batch_placement, decode_user_report, delivered_rate, encode_delivery, render_composition, select_leaders,
};
use cachekit::model::{Database, Demand};

fn main() -> cachekit::Result<()> {
    let (files, users, t, file_bits) = (3, 6, 2, 15);
    let db = Database::generate(files, file_bits, 1);
    let placement = batch_placement(files, users, t, file_bits)?;
    let demand = Demand::new(vec![1, 1, 2, 2, 3, 3], files)?;
    let leaders = select_leaders(&demand);
    println!("leaders: {:?}", leaders.users());

    let messages = encode_delivery(&db, &placement, &demand)?;
    for m in &messages {
        println!("Y_{:<9} = {}", m.subset.to_string(), render_composition(&demand, &m.subset));
    }
    println!("{} messages, rate {}", messages.len(), delivered_rate(&messages, file_bits));

    for user in 1..=users {
        let cache = placement.cache_of(&db, user);
        let report = decode_user_report(user, &placement, &cache, &messages, &demand, &leaders)?;
        let ok = report.file.as_bitslice() == db.file(demand.file_of(user));
        let rebuilt: Vec<String> = report.reconstructed.iter().map(|s| s.to_string()).collect();
        println!("user {user}: decoded {}, rebuilt [{}]", if ok { "ok" } else { "WRONG" }, rebuilt.join(" "));
    }
    Ok(())
}
