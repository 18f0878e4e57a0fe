//! Draws from a 50-variable design with the Gibbs sampler and compares the
//! empirical marginals of the first few variables with the exact ones of their
//! connected component.
//!
//! `cargo run --release --example gibbs_sampling -- 20000`

use isinglab::datagen::{build_theta, replicate_rng, sample_gibbs, BaseDesign, DesignSpec, GibbsOptions};

fn main() -> isinglab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    // Five copies of a 10-variable design: each block can be enumerated.
    let design = build_theta(&DesignSpec::block(BaseDesign::T3, 5, 5))?;
    let data = sample_gibbs(&design.theta, n, &GibbsOptions::default(), &mut replicate_rng(3, 0))?;
    let block = design.theta.as_matrix().view((0, 0), (10, 10)).into_owned();
    let exact = isinglab::ising::moments(&isinglab::ThetaMatrix::from_matrix(block)?)?;
    let means = data.column_means();
    println!("p = {}, {} edges, n = {n}", design.p(), design.truth.len());
    for k in 0..10 {
        println!("  P(x{k} = 1): gibbs {:.4}  exact {:.4}", means[k], exact[(k, k)]);
    }
    Ok(())
}
