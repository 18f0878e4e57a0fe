//! Fits the regularization path of every method on one simulated dataset and
//! prints how the number of edges grows as the penalty shrinks.
//!
//! `cargo run --release --example fit_path -- T3 1000`

use isinglab::datagen::{build_theta, replicate_rng, sample_exact, BaseDesign, DesignSpec};
use isinglab::methods::fit_paths;
use isinglab::{MethodId, SolverOptions};

fn main() -> isinglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let base: BaseDesign = args.next().as_deref().unwrap_or("T3").parse()?;
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let design = build_theta(&DesignSpec::new(base, 5))?;
    let data = sample_exact(&design.theta, n, &mut replicate_rng(11, 0))?;
    println!("{base}: {} true edges, n = {n}", design.truth.len());

    let paths = fit_paths(&data, &MethodId::ALL, 10, 1000.0, &SolverOptions::default());
    for (method, path) in MethodId::ALL.iter().zip(paths) {
        let path = path?;
        let counts: Vec<String> = path.path.iter().map(|e| e.edges.len().to_string()).collect();
        println!("{:<16} {:>6.3}s  edges: {}", method.label(), path.seconds, counts.join(" "));
    }
    Ok(())
}
