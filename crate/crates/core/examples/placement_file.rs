//! Placements as text: write one, read it back, and see whether it is a
//! batch placement.
//!
//!     cargo run --example placement_file

use cachekit::centralized::batch_placement;
use cachekit::combinatorics::rational;
use cachekit::decentralized::random_placement;
use cachekit::model::Placement;

fn main() -> cachekit::Result<()> {
    let batch = batch_placement(2, 3, 1, 6)?;
    let text = batch.to_text();
    print!("{text}");
    let parsed = Placement::parse(&text)?;
    println!("batch view recovered: t = {:?}", parsed.batch_view().map(|v| v.t));

    let random = Placement::parse(&random_placement(2, 3, &rational(1, 1), 6, 4)?.to_text())?;
    println!("random placement: batch view {:?}", random.batch_view().map(|v| v.t));

    match Placement::parse("3 2 4 1\n1 1:1 1:2 1:3 1:4 2:1\n2\n3\n") {
        Err(e) => println!("over budget: {e}"),
        Ok(_) => println!("over budget placement accepted?"),
    }
    match Placement::parse("2 2 4 1\n1 1:1\n2 3:1\n") {
        Err(e) => println!("bad file index: {e}"),
        Ok(_) => println!("bad placement accepted?"),
    }
    Ok(())
}
