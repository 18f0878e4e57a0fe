//! Penalty grids, un-shrunk refits and the choice of one model on a path.

use std::collections::HashMap;

use log::warn;
use nalgebra::DMatrix;

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::ising::{gaussian_log_likelihood, gaussian_surrogate, pseudo_log_likelihood, ThetaMatrix};
use crate::methods::{directed_mean, directed_table, node_problem, Family, GraphEstimate, MethodId};
use crate::solvers::{glasso, pseudo, LogisticProblem, PenaltySpec, SolverOptions};

pub const DEFAULT_GRID_COUNT: usize = 50;
pub const DEFAULT_GRID_RATIO: f64 = 1000.0;

/// Strictly decreasing, log-equispaced penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Any strictly decreasing list of finite nonnegative penalties.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidGrid("penalties must be finite and nonnegative".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidGrid("penalties must be strictly decreasing".into()));
        }
        Ok(Self { values })
    }
}

/// `values[i] = lambda_max * ratio^(-i / (count - 1))`.
pub fn make_grid(lambda_max: f64, count: usize, ratio: f64) -> Result<LambdaGrid> {
    if count < 2 {
        return Err(Error::InvalidGrid(format!("count must be at least 2, got {count}")));
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::InvalidGrid(format!("ratio must be finite and > 1, got {ratio}")));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::InvalidGrid(format!("lambda_max must be finite and > 0, got {lambda_max}")));
    }
    let last = (count - 1) as f64;
    let mut values: Vec<f64> = (0..count).map(|i| lambda_max * ratio.powf(-(i as f64) / last)).collect();
    values[0] = lambda_max;
    values[count - 1] = lambda_max / ratio;
    Ok(LambdaGrid { values })
}

/// Outcome of refitting a selected pattern without shrinkage.
#[derive(Debug, Clone)]
pub struct Refit {
    /// Coefficients in the method's coding, exactly zero off the pattern.
    pub theta: ThetaMatrix,
    /// Likelihood term used by BIC, on the scale of twice a log-likelihood:
    /// `n` times the Gaussian criterion `log det M - tr(M S)`, twice the log
    /// pseudo-likelihood (once for BMNPseudo 1/2), or for SepLogit the sum
    /// of node-wise logistic log-likelihoods, which against undirected
    /// edge counts ranks models like twice that sum against directed counts.
    pub loglik: f64,
    /// Gaussian methods only.
    pub precision: Option<DMatrix<f64>>,
    /// SepLogit only: directed coefficient table.
    pub directed: Option<DMatrix<f64>>,
    /// Some logistic refit hit the coefficient cap.
    pub separation: bool,
}

/// Reusable per-dataset state for refitting many patterns with one method.
pub struct Refitter<'a> {
    data: &'a BinaryDataset,
    method: MethodId,
    opts: &'a SolverOptions,
    surrogate: Option<DMatrix<f64>>,
    nodes: Vec<LogisticProblem>,
}

impl<'a> Refitter<'a> {
    pub fn new(data: &'a BinaryDataset, method: MethodId, opts: &'a SolverOptions) -> Result<Self> {
        let surrogate = match method.surrogate_kind() {
            Some(kind) => Some(gaussian_surrogate(data, kind)?.values),
            None => None,
        };
        let nodes = if method.family() == Family::SepLogit {
            (0..data.p()).map(|k| node_problem(data, k)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self { data, method, opts, surrogate, nodes })
    }

    /// Refits the pattern `edges`, optionally warm-started from a shrunk estimate.
    pub fn refit(&self, edges: &EdgeSet, warm: Option<&GraphEstimate>) -> Result<Refit> {
        let p = self.data.p();
        if edges.p() != p {
            return Err(Error::DimensionMismatch { expected: p, found: edges.p() });
        }
        let n = self.data.n() as f64;
        let penalty = PenaltySpec::restricted_to(edges);
        match self.method.family() {
            Family::Gaussian => {
                let s = self.surrogate.as_ref().expect("surrogate built for gaussian methods");
                let fit = glasso::glasso(s, &penalty, warm.and_then(|e| e.precision.as_ref()), &self.opts.glasso)?;
                let loglik = n * gaussian_log_likelihood(&fit.precision, s)?;
                let mut theta = ThetaMatrix::zeros(p);
                for (k, l) in edges.iter() {
                    theta.set_interaction(k, l, -fit.precision[(k, l)]);
                }
                Ok(Refit { theta, loglik, precision: Some(fit.precision), directed: None, separation: false })
            }
            Family::Pseudo => {
                let warm = warm.and_then(|e| e.theta_shrunk.as_ref());
                let (theta, _) = pseudo::pseudo_likelihood_fit(self.data, &penalty, warm, &self.opts.pseudo)?;
                let pl = pseudo_log_likelihood(self.data, &theta)?;
                let loglik = if self.method == MethodId::BmnPseudoHalf { pl } else { 2.0 * pl };
                Ok(Refit { theta, loglik, precision: None, directed: None, separation: false })
            }
            Family::SepLogit => {
                let mut fits = Vec::with_capacity(p);
                let mut loglik = 0.0;
                let mut separation = false;
                for (k, problem) in self.nodes.iter().enumerate() {
                    let penalties: Vec<f64> = (0..p)
                        .filter(|&l| l != k)
                        .map(|l| if edges.contains(k, l) { 0.0 } else { f64::INFINITY })
                        .collect();
                    let fit = problem.fit(&penalties, None, &self.opts.logistic).map_err(|e| Error::Solver {
                        method: self.method,
                        lambda: 0.0,
                        node: Some(k),
                        source: Box::new(e),
                    })?;
                    loglik += problem.log_likelihood(fit.intercept, &fit.coefficients);
                    separation |= fit.separation;
                    fits.push(fit);
                }
                if separation {
                    warn!("{}: refit hit the coefficient cap (separated data)", self.method);
                }
                let table = directed_table(p, &fits);
                Ok(Refit { theta: directed_mean(&table), loglik, precision: None, directed: Some(table), separation })
            }
        }
    }
}

/// Un-shrunk refit of one path element.
pub fn unshrunk_refit(data: &BinaryDataset, estimate: &GraphEstimate, opts: &SolverOptions) -> Result<Refit> {
    Refitter::new(data, estimate.method, opts)?.refit(&estimate.edges, Some(estimate))
}

/// BIC of one path element (larger is better).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicScore {
    pub lambda: f64,
    pub loglik_term: f64,
    /// Main effects plus edges.
    pub df: usize,
    pub n: usize,
    pub score: f64,
}

impl BicScore {
    pub fn new(lambda: f64, loglik_term: f64, df: usize, n: usize) -> Self {
        let score = loglik_term - df as f64 * (n as f64).ln();
        Self { lambda, loglik_term, df, n, score }
    }
}

/// Refits every element of `path` and returns the one maximizing BIC (the
/// sparser model on ties) with its un-shrunk coefficients filled in, plus the
/// scores of all elements whose refit succeeded.
pub fn bic_select(
    data: &BinaryDataset,
    path: &[GraphEstimate],
    opts: &SolverOptions,
) -> Result<(GraphEstimate, Vec<BicScore>)> {
    let first = path.first().ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    let method = first.method;
    let refitter = Refitter::new(data, method, opts)?;
    let (n, p) = (data.n(), data.p());
    let mut cache: HashMap<&EdgeSet, Refit> = HashMap::new();
    let mut scores = Vec::with_capacity(path.len());
    let mut best: Option<(usize, f64)> = None;
    let mut last_err = None;
    for (i, est) in path.iter().enumerate() {
        if !cache.contains_key(&est.edges) {
            match refitter.refit(&est.edges, Some(est)) {
                Ok(r) => {
                    cache.insert(&est.edges, r);
                }
                Err(e) => {
                    warn!("{method}: refit at lambda = {:.4e} failed and is skipped: {e}", est.lambda);
                    last_err = Some(e);
                    continue;
                }
            }
        }
        let refit = &cache[&est.edges];
        let score = BicScore::new(est.lambda, refit.loglik, p + est.edges.len(), n);
        let better = match best {
            None => true,
            Some((j, s)) => score.score > s || (score.score == s && est.lambda > path[j].lambda),
        };
        if better {
            best = Some((i, score.score));
        }
        scores.push(score);
    }
    let (idx, _) = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or_else(|| Error::InvalidArgument("no model could be refitted".into()))),
    };
    let mut chosen = path[idx].clone();
    let refit = cache.remove(&path[idx].edges).expect("chosen model was refitted");
    chosen.theta_unshrunk = Some(refit.theta);
    Ok((chosen, scores))
}

/// Path element with the highest accuracy against `truth`; the sparser model
/// on ties. Not defined for SepLogit.
pub fn oracle_select(path: &[GraphEstimate], truth: &EdgeSet) -> Result<GraphEstimate> {
    let first = path.first().ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    if first.method.family() == Family::SepLogit {
        return Err(Error::UnsupportedMethod(first.method));
    }
    let mut best: Option<(usize, usize)> = None;
    for (i, est) in path.iter().enumerate() {
        if est.edges.p() != truth.p() {
            return Err(Error::DimensionMismatch { expected: truth.p(), found: est.edges.p() });
        }
        let errors = est.edges.as_set().symmetric_difference(truth.as_set()).count();
        if best.is_none_or(|(j, e)| errors < e || (errors == e && est.lambda > path[j].lambda)) {
            best = Some((i, errors));
        }
    }
    Ok(path[best.expect("nonempty path").0].clone())
}
