//! Random placement, level-by-level delivery, and the measured rate
//! against the closed form.
//!
//!     cargo run --release --example decentralized_delivery

use cachekit::combinatorics::{rational, to_f64};
use cachekit::decentralized::{
    decode_all_decentralized, empirical_rate, encode_delivery_decentralized, level_partition, padding_bits,
    random_placement,
};
use cachekit::model::{Database, Demand};
use cachekit::rate_analysis::{dec_avg_rate, dec_rate_for};

fn main() -> cachekit::Result<()> {
    let (files, users, file_bits) = (3, 4, 100_000);
    let memory = rational(1, 1);
    let db = Database::generate(files, file_bits, 11);
    let placement = random_placement(files, users, &memory, file_bits, 12)?;
    let partition = level_partition(&placement);
    println!("bits per level: {:?}", partition.level_sizes());

    for requests in [vec![1, 1, 1, 1], vec![1, 2, 1, 2], vec![3, 1, 2, 1]] {
        let d = Demand::new(requests, files)?;
        let messages = encode_delivery_decentralized(&db, &partition, &d)?;
        let decoded = decode_all_decentralized(&db, &placement, &partition, &messages, &d)?;
        let ok = decoded.iter().enumerate().all(|(k, w)| w.as_bitslice() == db.file(d.file_of(k + 1)));
        let measured = to_f64(&empirical_rate(&messages, file_bits));
        let predicted = to_f64(&dec_rate_for(files, &memory, d.distinct())?);
        println!(
            "demand {:?}: {} messages, rate {measured:.4} vs {predicted:.4}, padding {} bits, decoded {}",
            d.requests(),
            messages.len(),
            padding_bits(&partition, &d)?,
            if ok { "ok" } else { "WRONG" }
        );
    }
    println!("average over demands: {:.4}", to_f64(&dec_avg_rate(files, &memory, users)?));
    Ok(())
}
