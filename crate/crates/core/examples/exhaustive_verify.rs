//! Every demand of a small system, every user, bit for bit.
//!
//!     cargo run --release --example exhaustive_verify -- 3 5 2

use cachekit::centralized::{batch_placement, decode_all, delivered_rate, encode_delivery};
use cachekit::combinatorics::{binomial, rational, Rational};
use cachekit::model::{Database, Demand};
use cachekit::rate_analysis::{avg_rate_optimal, peak_rate_optimal};
use num_traits::Zero;

fn main() -> cachekit::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("N K t")).collect();
    let (files, users, t) = match args[..] {
        [n, k, t] => (n, k, t),
        _ => (3, 5, 2),
    };
    let file_bits = 2 * binomial(users as u64, t as u64)? as usize;
    let db = Database::generate(files, file_bits, 3);
    let placement = batch_placement(files, users, t, file_bits)?;

    let (mut count, mut total, mut peak) = (0u64, Rational::zero(), Rational::zero());
    for d in Demand::all(files, users) {
        let messages = encode_delivery(&db, &placement, &d)?;
        let decoded = decode_all(&db, &placement, &messages, &d)?;
        for (k, w) in decoded.iter().enumerate() {
            assert_eq!(w.as_bitslice(), db.file(d.file_of(k + 1)), "demand {:?}, user {}", d.requests(), k + 1);
        }
        let r = delivered_rate(&messages, file_bits);
        peak = peak.max(r.clone());
        total += r;
        count += 1;
    }
    let memory = rational((files * t) as i64, users as i64);
    println!("N={files} K={users} t={t} F={file_bits}: {count} demands decoded");
    println!("average {} (formula {})", total / Rational::from_integer(count.into()), avg_rate_optimal(files, users, &memory)?);
    println!("peak    {} (formula {})", peak, peak_rate_optimal(files, users, &memory)?);
    Ok(())
}
