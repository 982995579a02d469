//! Average-rate tradeoff for 30 files and 30 users, against the earlier
//! coded-multicast scheme.
//!
//!     cargo run --example tradeoff_table

use cachekit::combinatorics::rational_int;
use cachekit::rate_analysis::{parse_grid, rate_curve, Scheme};

fn main() -> cachekit::Result<()> {
    let (files, users) = (30, 30);
    let grid = parse_grid("0:6:1/2")?;
    let schemes = [Scheme::OptimalAvg, Scheme::ManAvg, Scheme::OptimalPeak, Scheme::DecAvg, Scheme::ManDecAvg];
    let curves = schemes
        .iter()
        .map(|&s| rate_curve(s, files, users, &grid))
        .collect::<cachekit::Result<Vec<_>>>()?;

    print!("{:>6}", "M");
    for c in &curves {
        print!("{:>14}", c.scheme.label());
    }
    println!();
    for (i, m) in grid.iter().enumerate() {
        print!("{:>6}", m.to_string());
        for c in &curves {
            print!("{:>14.4}", c.points[i].1);
        }
        println!();
    }

    let at_one = grid.iter().position(|m| *m == rational_int(1)).unwrap();
    let (opt, man) = (curves[0].points[at_one].1, curves[1].points[at_one].1);
    println!("M = 1: {opt:.2} vs {man:.2} ({:.1}% less traffic)", 100.0 * (1.0 - opt / man));
    Ok(())
}
