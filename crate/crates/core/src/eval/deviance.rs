use log::warn;

use crate::data::BinaryDataset;
use crate::error::Result;
use crate::graph::EdgeSet;
use crate::ising::{exact_log_likelihood, gaussian_log_likelihood, gaussian_surrogate, pseudo_log_likelihood, SurrogateKind};
use crate::methods::{default_grid, fit_path, MethodId};
use crate::selection::LambdaGrid;
use crate::solvers::{exact_constrained_mle, glasso, pseudo_likelihood_fit, PenaltySpec, SolverOptions};

/// Deviances of the refitted model at one penalty, each relative to the
/// saturated model under the same criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct DevianceRow {
    pub lambda: f64,
    pub edges: usize,
    /// `2 (PL_sat - PL)`.
    pub pseudo: f64,
    pub pseudo_half: f64,
    /// `2 (L_sat - L)` with the exact likelihood.
    pub exact: f64,
    /// `2 n (G_sat - G)` for the surrogates `Cov + 1/3`, `Cov` and `Cor`.
    pub gauss: [f64; 3],
}

struct Criteria {
    pseudo: f64,
    exact: f64,
    gauss: [f64; 3],
}

const KINDS: [SurrogateKind; 3] = [SurrogateKind::CovPlusThird, SurrogateKind::Cov, SurrogateKind::Cor];

/// Maximized criteria under the zero pattern `edges`.
fn criteria(
    data: &BinaryDataset,
    surrogates: &[nalgebra::DMatrix<f64>],
    edges: &EdgeSet,
    opts: &SolverOptions,
) -> Result<Criteria> {
    let penalty = PenaltySpec::restricted_to(edges);
    let (theta_ps, _) = pseudo_likelihood_fit(data, &penalty, None, &opts.pseudo)?;
    let pseudo = pseudo_log_likelihood(data, &theta_ps)?;
    let (theta_po, _) = exact_constrained_mle(data, edges, Some(&theta_ps), &opts.exact)?;
    let exact = exact_log_likelihood(data, &theta_po)?;
    let mut gauss = [0.0; 3];
    for (g, s) in gauss.iter_mut().zip(surrogates) {
        let fit = glasso(s, &penalty, None, &opts.glasso)?;
        *g = gaussian_log_likelihood(&fit.precision, s)?;
    }
    Ok(Criteria { pseudo, exact, gauss })
}

/// Fits the pseudo-likelihood path (on `grid`, or the default grid) and, for
/// each sparsity pattern on it, the un-shrunk maximizers of the pseudo,
/// exact and Gaussian criteria. Rows whose refits fail are dropped.
pub fn deviance_curves(
    data: &BinaryDataset,
    grid: Option<&LambdaGrid>,
    opts: &SolverOptions,
) -> Result<Vec<DevianceRow>> {
    let grid = match grid {
        Some(g) => g.clone(),
        None => default_grid(data, MethodId::BmnPseudo)?,
    };
    let path = fit_path(data, MethodId::BmnPseudo, &grid, opts)?;
    let surrogates: Vec<_> =
        KINDS.iter().map(|&k| gaussian_surrogate(data, k).map(|s| s.values)).collect::<Result<_>>()?;
    let nf = data.n() as f64;
    let sat = criteria(data, &surrogates, &EdgeSet::complete(data.p()), opts)?;

    let mut rows = Vec::with_capacity(path.len());
    let mut last: Option<(EdgeSet, Criteria)> = None;
    for est in &path {
        let reuse = last.as_ref().is_some_and(|(e, _)| *e == est.edges);
        if !reuse {
            match criteria(data, &surrogates, &est.edges, opts) {
                Ok(c) => last = Some((est.edges.clone(), c)),
                Err(e) => {
                    warn!("deviance row at lambda = {:.4e} dropped: {e}", est.lambda);
                    continue;
                }
            }
        }
        let c = &last.as_ref().expect("criteria computed").1;
        let pseudo = 2.0 * (sat.pseudo - c.pseudo);
        let mut gauss = [0.0; 3];
        for j in 0..3 {
            gauss[j] = 2.0 * nf * (sat.gauss[j] - c.gauss[j]);
        }
        rows.push(DevianceRow {
            lambda: est.lambda,
            edges: est.edges.len(),
            pseudo,
            pseudo_half: pseudo / 2.0,
            exact: 2.0 * (sat.exact - c.exact),
            gauss,
        });
    }
    Ok(rows)
}
