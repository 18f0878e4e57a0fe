//! Symmetric l1-penalized pseudo-likelihood maximization.
//!
//! Minimizes `-PL(theta)/n + sum_{k<l} L_kl |theta_kl|` where `PL` is the log
//! pseudo-likelihood (see [`crate::ising::pseudo_log_likelihood`]). All `p`
//! node-wise logistic models are fitted jointly: an off-diagonal coefficient
//! `theta_kl` is one parameter that enters the linear predictor of node `k`
//! (through `x_l`) and of node `l` (through `x_k`), so symmetry holds by
//! construction. The scheme is the same proximal Newton / coordinate descent
//! as [`super::logistic`].

use std::time::Instant;

use super::{soft_threshold, PenaltySpec, SolveReport};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::ising::{logit, sigmoid, softplus, ThetaMatrix};

#[derive(Debug, Clone)]
pub struct PseudoOptions {
    /// Stop when the largest parameter move of an outer step is below this.
    pub tol: f64,
    pub max_iter: usize,
    pub coef_cap: f64,
}

impl Default for PseudoOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 500, coef_cap: 30.0 }
    }
}

const MIN_WEIGHT: f64 = 1e-12;

struct Layout {
    n: usize,
    p: usize,
    /// `y[k * n + i] = x_ik`.
    y: Vec<f64>,
    ones: Vec<Vec<u32>>,
}

impl Layout {
    fn new(data: &BinaryDataset) -> Self {
        let (n, p) = (data.n(), data.p());
        let mut y = vec![0.0; n * p];
        for (i, row) in data.rows().enumerate() {
            for k in 0..p {
                y[k * n + i] = f64::from(row[k]);
            }
        }
        let ones = (0..p).map(|k| data.ones(k)).collect();
        Self { n, p, y, ones }
    }

    fn linear_predictor(&self, theta: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let mut eta = vec![0.0; n * p];
        for k in 0..p {
            let base = theta[k * p + k];
            eta[k * n..(k + 1) * n].iter_mut().for_each(|e| *e = base);
            for l in (0..p).filter(|&l| l != k) {
                let t = theta[k * p + l];
                if t != 0.0 {
                    for &i in &self.ones[l] {
                        eta[k * n + i as usize] += t;
                    }
                }
            }
        }
        eta
    }

    fn mean_loss(&self, eta: &[f64]) -> f64 {
        let s: f64 = eta.iter().zip(&self.y).map(|(&e, &y)| softplus(if y == 1.0 { -e } else { e })).sum();
        s / self.n as f64
    }
}

fn penalty_value(theta: &[f64], lam: &[f64], p: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..p {
        for l in k + 1..p {
            let t = theta[k * p + l];
            if t != 0.0 {
                s += lam[k * p + l] * t.abs();
            }
        }
    }
    s
}

/// Fits the symmetric penalized pseudo-likelihood. Returns the coefficient
/// matrix in `{0,1}` coding.
pub fn pseudo_likelihood_fit(
    data: &BinaryDataset,
    penalty: &PenaltySpec,
    warm_start: Option<&ThetaMatrix>,
    opts: &PseudoOptions,
) -> Result<(ThetaMatrix, SolveReport)> {
    let start = Instant::now();
    let (n, p) = (data.n(), data.p());
    penalty.check_dim(p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("pseudo-likelihood needs observations".into()));
    }
    let layout = Layout::new(data);
    let nf = n as f64;
    let cap = opts.coef_cap;
    let lam: Vec<f64> = (0..p * p).map(|idx| penalty.weight(idx / p, idx % p)).collect();

    let mut theta = match warm_start {
        Some(t) if t.p() == p => {
            if !t.is_finite() {
                return Err(Error::NonFinite);
            }
            t.as_matrix().transpose().as_slice().to_vec()
        }
        _ => {
            let mut t = vec![0.0; p * p];
            for (k, q) in data.column_means().into_iter().enumerate() {
                t[k * p + k] = logit(q).clamp(-cap, cap);
            }
            t
        }
    };
    for idx in 0..p * p {
        if lam[idx].is_infinite() {
            theta[idx] = 0.0;
        }
    }
    let pairs: Vec<(usize, usize)> =
        (0..p).flat_map(|k| (k + 1..p).map(move |l| (k, l))).filter(|&(k, l)| lam[k * p + l].is_finite()).collect();

    let mut eta = layout.linear_predictor(&theta);
    let mut obj = layout.mean_loss(&eta) + penalty_value(&theta, &lam, p);
    let mut w = vec![0.0; n * p];
    let mut target = vec![0.0; n * p];
    let mut resid = vec![0.0; n * p];
    let mut diag_curv = vec![0.0; p];
    let mut pair_curv = vec![0.0; pairs.len()];
    let mut trial_eta = vec![0.0; n * p];
    let mut trial = vec![0.0; p * p];

    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        for idx in 0..n * p {
            let pr = sigmoid(eta[idx]);
            w[idx] = (pr * (1.0 - pr)).max(MIN_WEIGHT);
            target[idx] = (layout.y[idx] - pr) / w[idx];
            resid[idx] = target[idx];
        }
        for k in 0..p {
            diag_curv[k] = w[k * n..(k + 1) * n].iter().sum::<f64>() / nf;
        }
        for (h, &(k, l)) in pair_curv.iter_mut().zip(&pairs) {
            let a: f64 = layout.ones[l].iter().map(|&i| w[k * n + i as usize]).sum();
            let b: f64 = layout.ones[k].iter().map(|&i| w[l * n + i as usize]).sum();
            *h = (a + b) / nf;
        }

        let mut next = theta.clone();
        let mut full_sweep = true;
        for _ in 0..10_000 {
            let mut max_move: f64 = 0.0;
            for k in 0..p {
                let g: f64 = (k * n..(k + 1) * n).map(|idx| w[idx] * resid[idx]).sum::<f64>() / nf;
                let old = next[k * p + k];
                let new = (old + g / diag_curv[k]).clamp(-cap, cap);
                if new != old {
                    let d = new - old;
                    next[k * p + k] = new;
                    resid[k * n..(k + 1) * n].iter_mut().for_each(|r| *r -= d);
                    max_move = max_move.max(d.abs() * diag_curv[k].sqrt());
                }
            }
            for (&(k, l), &h) in pairs.iter().zip(&pair_curv) {
                let old = next[k * p + l];
                if h <= 0.0 || (!full_sweep && old == 0.0) {
                    continue;
                }
                let a: f64 = layout.ones[l].iter().map(|&i| w[k * n + i as usize] * resid[k * n + i as usize]).sum();
                let b: f64 = layout.ones[k].iter().map(|&i| w[l * n + i as usize] * resid[l * n + i as usize]).sum();
                let g = (a + b) / nf;
                let new = (soft_threshold(h * old + g, lam[k * p + l]) / h).clamp(-cap, cap);
                if new != old {
                    let d = new - old;
                    next[k * p + l] = new;
                    next[l * p + k] = new;
                    for &i in &layout.ones[l] {
                        resid[k * n + i as usize] -= d;
                    }
                    for &i in &layout.ones[k] {
                        resid[l * n + i as usize] -= d;
                    }
                    max_move = max_move.max(d.abs() * h.sqrt());
                }
            }
            if max_move <= 1e-13 {
                if full_sweep {
                    break;
                }
                full_sweep = true;
            } else {
                full_sweep = false;
            }
        }

        let dir: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let mut t = 1.0;
        let mut accepted = false;
        let mut decrease = 0.0;
        while t > 1e-10 {
            for idx in 0..n * p {
                trial_eta[idx] = eta[idx] + t * (target[idx] - resid[idx]);
            }
            for idx in 0..p * p {
                trial[idx] = theta[idx] + t * dir[idx];
            }
            let f = layout.mean_loss(&trial_eta) + penalty_value(&trial, &lam, p);
            if f <= obj + 1e-14 * obj.abs().max(1.0) {
                decrease = obj - f;
                obj = f;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            delta = 0.0;
            converged = true;
            break;
        }
        delta = dir.iter().fold(0.0f64, |a, d| a.max(d.abs())) * t;
        theta.copy_from_slice(&trial);
        eta.copy_from_slice(&trial_eta);
        if delta <= opts.tol {
            converged = true;
            break;
        }
        // Separable directions walk to the cap; once there, stop when the
        // objective no longer moves.
        let at_cap = theta.iter().any(|v| v.abs() >= cap * (1.0 - 1e-9));
        if at_cap && decrease <= 1e-13 * obj.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    let report = SolveReport { iterations, final_delta: delta, converged, wall_time: start.elapsed().as_secs_f64() };
    if !converged {
        return Err(Error::NotConverged { solver: "pseudo_likelihood", report });
    }
    // Rebuild exact symmetry and exact zeros on excluded entries.
    let mut out = ThetaMatrix::zeros(p);
    for k in 0..p {
        out.set_main_effect(k, theta[k * p + k]);
        for l in k + 1..p {
            let v = if lam[k * p + l].is_infinite() { 0.0 } else { theta[k * p + l] };
            out.set_interaction(k, l, v);
        }
    }
    Ok((out, report))
}

/// Gradient of `-PL/n` with respect to the upper-triangular parameters
/// (diagonal included), as a symmetric matrix.
pub fn pseudo_gradient(data: &BinaryDataset, theta: &ThetaMatrix) -> Result<nalgebra::DMatrix<f64>> {
    let (n, p) = (data.n(), data.p());
    if theta.p() != p {
        return Err(Error::DimensionMismatch { expected: p, found: theta.p() });
    }
    let layout = Layout::new(data);
    let flat = theta.as_matrix().transpose().as_slice().to_vec();
    let eta = layout.linear_predictor(&flat);
    let resid: Vec<f64> = eta.iter().zip(&layout.y).map(|(&e, &y)| sigmoid(e) - y).collect();
    let nf = n as f64;
    let mut g = nalgebra::DMatrix::zeros(p, p);
    for k in 0..p {
        g[(k, k)] = resid[k * n..(k + 1) * n].iter().sum::<f64>() / nf;
        for l in k + 1..p {
            let a: f64 = layout.ones[l].iter().map(|&i| resid[k * n + i as usize]).sum();
            let b: f64 = layout.ones[k].iter().map(|&i| resid[l * n + i as usize]).sum();
            g[(k, l)] = (a + b) / nf;
            g[(l, k)] = g[(k, l)];
        }
    }
    Ok(g)
}

/// Largest violation of the optimality conditions of the penalized problem.
pub fn pseudo_kkt_residual(data: &BinaryDataset, penalty: &PenaltySpec, theta: &ThetaMatrix) -> Result<f64> {
    let g = pseudo_gradient(data, theta)?;
    let p = theta.p();
    let mut worst: f64 = 0.0;
    for k in 0..p {
        worst = worst.max(g[(k, k)].abs());
        for l in k + 1..p {
            let lam = penalty.weight(k, l);
            let t = theta.get(k, l);
            let v = if lam.is_infinite() {
                0.0
            } else if t != 0.0 {
                (g[(k, l)] + lam * t.signum()).abs()
            } else {
                (g[(k, l)].abs() - lam).max(0.0)
            };
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

/// Smallest scalar penalty at which every interaction is zero: the largest
/// off-diagonal gradient at the intercept-only fit, `2 |q_kl - q_k q_l|`.
pub fn pseudo_lambda_max(data: &BinaryDataset) -> f64 {
    let g = data.gram();
    let nf = data.n() as f64;
    let p = data.p();
    let mut best: f64 = 0.0;
    for k in 0..p {
        for l in k + 1..p {
            let v = 2.0 * (g[(k, l)] / nf - g[(k, k)] / nf * g[(l, l)] / nf).abs();
            best = best.max(v);
        }
    }
    best
}
