//! Selects a graph by BIC and, because the truth is known here, also by the
//! oracle rule, then scores both against the true pattern.
//!
//! `cargo run --release --example bic_selection -- gauss_cor 2500`

use isinglab::datagen::{build_theta, replicate_rng, sample_exact, BaseDesign, DesignSpec};
use isinglab::eval::confusion;
use isinglab::methods::fit_default_path;
use isinglab::selection::{bic_select, oracle_select};
use isinglab::{MethodId, SolverOptions};

fn main() -> isinglab::Result<()> {
    let mut args = std::env::args().skip(1);
    let method: MethodId = args.next().as_deref().unwrap_or("gauss_cor").parse()?;
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2500);
    let design = build_theta(&DesignSpec::new(BaseDesign::T3, 5))?;
    let data = sample_exact(&design.theta, n, &mut replicate_rng(21, 0))?;
    let opts = SolverOptions::default();
    let path = fit_default_path(&data, method, &opts)?;

    let (chosen, scores) = bic_select(&data, &path, &opts)?;
    let best = scores.iter().find(|s| s.lambda == chosen.lambda).expect("chosen model has a score");
    let c = confusion(&chosen.edges, &design.truth)?;
    println!("BIC    lambda {:.4e}  df {}  edges {}  TPR {:.3} FPR {:.3}", chosen.lambda, best.df, c.pos, c.tpr, c.fpr);

    if method.family() != isinglab::methods::Family::SepLogit {
        let oracle = oracle_select(&path, &design.truth)?;
        let c = confusion(&oracle.edges, &design.truth)?;
        println!("oracle lambda {:.4e}  edges {}  TPR {:.3} FPR {:.3}", oracle.lambda, c.pos, c.tpr, c.fpr);
    }
    Ok(())
}
