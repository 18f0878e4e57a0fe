//! Loads an indicator table restricted to one stratum, the way observed
//! survey data is prepared before structure learning.
//!
//! `cargo run --example ingest -- data.csv region=north region`

use isinglab::io::{ingest_stratified, StratumSpec};

fn main() -> isinglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: ingest <file.csv> [column=value] [stratum column...]");
        std::process::exit(2);
    };
    let filters: Vec<String> = args.next().into_iter().collect();
    let spec = StratumSpec {
        filters: StratumSpec::parse_filters(&filters)?,
        stratum_columns: args.collect(),
        min_positives: StratumSpec::DEFAULT_MIN_POSITIVES,
    };
    let ing = ingest_stratified(&path, &spec)?;
    println!("{} of {} rows, {} indicators", ing.data.n(), ing.rows_total, ing.data.p());
    for (name, count) in ing.data.names().iter().zip(ing.data.column_counts()) {
        println!("  {name:<20} {count}");
    }
    if !ing.dropped.is_empty() {
        println!("dropped: {}", ing.dropped.join(", "));
    }
    Ok(())
}
