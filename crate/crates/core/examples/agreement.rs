//! Measures how much two methods agree on the graphs they select for the same
//! data, and how their intersection trades edges for precision.
//!
//! `cargo run --release --example agreement -- 800`

use isinglab::datagen::{build_theta, replicate_rng, sample_exact, BaseDesign, DesignSpec};
use isinglab::eval::{agreement, confusion};
use isinglab::methods::{fit_paths, intersect_models};
use isinglab::selection::bic_select;
use isinglab::{MethodId, SolverOptions};

fn main() -> isinglab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(800);
    let design = build_theta(&DesignSpec::new(BaseDesign::T2, 5))?;
    let opts = SolverOptions::default();
    let methods = [MethodId::SepLogitOr, MethodId::GaussCor];
    for r in 0..5 {
        let data = sample_exact(&design.theta, n, &mut replicate_rng(77, r))?;
        let paths = fit_paths(&data, &methods, 50, 1000.0, &opts);
        let mut chosen = Vec::new();
        for p in paths {
            chosen.push(bic_select(&data, &p?.path, &opts)?.0);
        }
        let g = agreement(&chosen[0].edges, &chosen[1].edges)?;
        let both = intersect_models(&chosen[0], &chosen[1])?;
        let precision = |e| confusion(e, &design.truth).map(|c| c.precision);
        println!(
            "replicate {r}: kappa {:.2} kappa_bar {}  precision OR {:.2} Cor {:.2} both {:.2}",
            g.kappa,
            g.kappa_bar,
            precision(&chosen[0].edges)?,
            precision(&chosen[1].edges)?,
            precision(&both.edges)?
        );
    }
    Ok(())
}
