//! Tabulates pseudo, exact and Gaussian deviances along a pseudo-likelihood
//! path for one simulated dataset.
//!
//! `cargo run --example deviance_curves -- T2 500`

use isinglab::datagen::{build_theta, replicate_rng, sample_exact, BaseDesign, DesignSpec};
use isinglab::eval::deviance_curves;
use isinglab::SolverOptions;

fn main() -> isinglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let base: BaseDesign = args.next().as_deref().unwrap_or("T2").parse()?;
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);
    let design = build_theta(&DesignSpec::new(base, 5))?;
    let data = sample_exact(&design.theta, n, &mut replicate_rng(2009, 0))?;
    let rows = deviance_curves(&data, None, &SolverOptions::default())?;
    println!("{:>10} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "lambda", "edges", "pseudo", "half", "exact", "G1", "G2", "G3");
    for r in rows {
        println!(
            "{:>10.3e} {:>5} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            r.lambda, r.edges, r.pseudo, r.pseudo_half, r.exact, r.gauss[0], r.gauss[1], r.gauss[2]
        );
    }
    Ok(())
}
