//! Prints the edge counts of the simulation designs for a range of seeds.
//!
//! `cargo run --example designs -- T1 20`

use isinglab::datagen::{build_theta, BaseDesign, DesignSpec};

fn main() -> isinglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let base: BaseDesign = args.next().as_deref().unwrap_or("T1").parse()?;
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    for seed in 0..seeds {
        let d = build_theta(&DesignSpec::new(base, seed))?;
        let strongest = d.truth.iter().map(|(k, l)| d.native.get(k, l).abs()).fold(0.0, f64::max);
        println!("{base} seed {seed:>3}: p = {}, {} edges, largest |theta| = {strongest:.3}", d.p(), d.truth.len());
    }
    Ok(())
}
