//! l1-penalized logistic regression.
//!
//! Minimizes
//!
//! ```text
//! (1/n) sum_i log(1 + exp(-s_i (b0 + x_i' b))) + sum_j L_j |b_j|,    s_i = 2 y_i - 1
//! ```
//!
//! Each outer iteration builds the weighted quadratic model of the loss at the
//! current point (IRLS weights) and minimizes model + penalty by cyclic
//! coordinate descent with an active set; a backtracking line search on the
//! true objective guards the step. The intercept is never penalized and a
//! `+inf` penalty pins its coefficient at zero. Coefficients are boxed in
//! `[-cap, cap]`; hitting the box is reported as separation.

use std::time::Instant;

use nalgebra::DMatrix;

use super::{soft_threshold, SolveReport};
use crate::error::{Error, Result};
use crate::ising::{logit, sigmoid, softplus};

#[derive(Debug, Clone)]
pub struct LogisticOptions {
    /// Stop when the largest coefficient move of an outer step is below this.
    pub tol: f64,
    /// Outer (Newton) iterations.
    pub max_iter: usize,
    pub coef_cap: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 500, coef_cap: 30.0 }
    }
}

#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Some coefficient sits on the `coef_cap` box: the data are (quasi-)separable.
    pub separation: bool,
    pub report: SolveReport,
}

const MIN_WEIGHT: f64 = 1e-12;

struct SparseColumn {
    idx: Vec<u32>,
    val: Vec<f64>,
}

/// A design matrix and binary response, pre-processed for repeated fits
/// along a penalty path.
pub struct LogisticProblem {
    n: usize,
    y: Vec<f64>,
    cols: Vec<SparseColumn>,
}

impl LogisticProblem {
    /// `x` is `n x m`, `y` holds 0/1 values.
    pub fn new(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: y.len() });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("logistic regression needs observations".into()));
        }
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument("logistic response must be 0/1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let cols = x
            .column_iter()
            .map(|c| {
                let (idx, val) = c.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i as u32, v)).unzip();
                SparseColumn { idx, val }
            })
            .collect();
        Ok(Self { n, y: y.to_vec(), cols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    /// Smallest scalar penalty at which every slope is zero:
    /// `max_j |(1/n) x_j' (y - ybar)|`.
    pub fn lambda_max(&self) -> f64 {
        let n = self.n as f64;
        let ybar = self.y.iter().sum::<f64>() / n;
        self.cols
            .iter()
            .map(|c| {
                let g: f64 = c.idx.iter().zip(&c.val).map(|(&i, &v)| v * (self.y[i as usize] - ybar)).sum();
                (g / n).abs()
            })
            .fold(0.0, f64::max)
    }

    fn linear_predictor(&self, intercept: f64, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![intercept; self.n];
        for (c, &b) in self.cols.iter().zip(beta) {
            if b != 0.0 {
                for (&i, &v) in c.idx.iter().zip(&c.val) {
                    eta[i as usize] += b * v;
                }
            }
        }
        eta
    }

    fn mean_loss(&self, eta: &[f64]) -> f64 {
        let s: f64 = eta.iter().zip(&self.y).map(|(&e, &y)| softplus(if y == 1.0 { -e } else { e })).sum();
        s / self.n as f64
    }

    /// Sum of the per-observation log-likelihoods at the given coefficients.
    pub fn log_likelihood(&self, intercept: f64, beta: &[f64]) -> f64 {
        -self.mean_loss(&self.linear_predictor(intercept, beta)) * self.n as f64
    }

    /// Gradient of the mean loss with respect to `(intercept, beta)`.
    pub fn gradient(&self, intercept: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n as f64;
        let eta = self.linear_predictor(intercept, beta);
        let resid: Vec<f64> = eta.iter().zip(&self.y).map(|(&e, &y)| sigmoid(e) - y).collect();
        let g0 = resid.iter().sum::<f64>() / n;
        let g = self
            .cols
            .iter()
            .map(|c| c.idx.iter().zip(&c.val).map(|(&i, &v)| v * resid[i as usize]).sum::<f64>() / n)
            .collect();
        (g0, g)
    }

    /// Largest violation of the optimality conditions for the given penalties.
    pub fn kkt_residual(&self, penalties: &[f64], fit: &LogisticFit) -> f64 {
        let (g0, g) = self.gradient(fit.intercept, &fit.coefficients);
        let mut worst = g0.abs();
        for ((&gj, &bj), &lj) in g.iter().zip(&fit.coefficients).zip(penalties) {
            let v = if lj.is_infinite() {
                0.0
            } else if bj != 0.0 {
                (gj + lj * bj.signum()).abs()
            } else {
                (gj.abs() - lj).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Fits with one penalty per feature (`+inf` excludes the feature).
    pub fn fit(&self, penalties: &[f64], warm: Option<&LogisticFit>, opts: &LogisticOptions) -> Result<LogisticFit> {
        let start = Instant::now();
        let m = self.cols.len();
        if penalties.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: penalties.len() });
        }
        if penalties.iter().any(|l| l.is_nan() || *l < 0.0) {
            return Err(Error::InvalidArgument("penalties must lie in [0, inf]".into()));
        }
        let n = self.n as f64;
        let cap = opts.coef_cap;
        let (mut b0, mut beta) = match warm {
            Some(w) if w.coefficients.len() == m => (w.intercept, w.coefficients.clone()),
            _ => {
                let ybar = self.y.iter().sum::<f64>() / n;
                (logit(ybar).clamp(-cap, cap), vec![0.0; m])
            }
        };
        for (b, l) in beta.iter_mut().zip(penalties) {
            if l.is_infinite() {
                *b = 0.0;
            }
        }
        let objective = |eta: &[f64], beta: &[f64]| -> f64 {
            let pen: f64 = beta.iter().zip(penalties).filter(|(b, _)| **b != 0.0).map(|(b, l)| b.abs() * l).sum();
            self.mean_loss(eta) + pen
        };

        let mut eta = self.linear_predictor(b0, &beta);
        let mut obj = objective(&eta, &beta);
        let mut w = vec![0.0; self.n];
        let mut resid = vec![0.0; self.n];
        let mut target = vec![0.0; self.n];
        let mut curv = vec![0.0; m];
        let mut iterations = 0;
        let mut delta = f64::INFINITY;
        let mut converged = false;

        while iterations < opts.max_iter {
            iterations += 1;
            for i in 0..self.n {
                let pr = sigmoid(eta[i]);
                w[i] = (pr * (1.0 - pr)).max(MIN_WEIGHT);
                target[i] = (self.y[i] - pr) / w[i];
                resid[i] = target[i];
            }
            for (c, h) in self.cols.iter().zip(curv.iter_mut()) {
                *h = c.idx.iter().zip(&c.val).map(|(&i, &v)| w[i as usize] * v * v).sum::<f64>() / n;
            }
            let w_sum: f64 = w.iter().sum::<f64>() / n;

            // Coordinate descent on the quadratic model, resid = target - delta_eta.
            let mut nb0 = b0;
            let mut nbeta = beta.clone();
            let mut full_sweep = true;
            for _ in 0..10_000 {
                let mut max_move: f64 = 0.0;
                let g0: f64 = w.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>() / n;
                let new0 = (nb0 + g0 / w_sum).clamp(-cap, cap);
                let d0 = new0 - nb0;
                if d0 != 0.0 {
                    nb0 = new0;
                    resid.iter_mut().for_each(|r| *r -= d0);
                    max_move = max_move.max(d0.abs() * w_sum.sqrt());
                }
                for j in 0..m {
                    let lj = penalties[j];
                    let h = curv[j];
                    if lj.is_infinite() || h <= 0.0 || (!full_sweep && nbeta[j] == 0.0) {
                        continue;
                    }
                    let c = &self.cols[j];
                    let g: f64 =
                        c.idx.iter().zip(&c.val).map(|(&i, &v)| w[i as usize] * v * resid[i as usize]).sum::<f64>() / n;
                    let old = nbeta[j];
                    let new = (soft_threshold(h * old + g, lj) / h).clamp(-cap, cap);
                    if new != old {
                        let d = new - old;
                        nbeta[j] = new;
                        for (&i, &v) in c.idx.iter().zip(&c.val) {
                            resid[i as usize] -= d * v;
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

            // Line search along the Newton direction.
            let d0 = nb0 - b0;
            let dir: Vec<f64> = nbeta.iter().zip(&beta).map(|(a, b)| a - b).collect();
            let step_eta: Vec<f64> = target.iter().zip(&resid).map(|(t, r)| t - r).collect();
            let mut t = 1.0;
            let mut accepted = false;
            let mut decrease = 0.0;
            let mut trial_eta = vec![0.0; self.n];
            let mut trial_beta = vec![0.0; m];
            while t > 1e-10 {
                for i in 0..self.n {
                    trial_eta[i] = eta[i] + t * step_eta[i];
                }
                for j in 0..m {
                    trial_beta[j] = beta[j] + t * dir[j];
                }
                let f = objective(&trial_eta, &trial_beta);
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
            delta = dir.iter().fold(d0.abs(), |a, d| a.max(d.abs())) * t;
            b0 += t * d0;
            beta.copy_from_slice(&trial_beta);
            eta.copy_from_slice(&trial_eta);
            if delta <= opts.tol {
                converged = true;
                break;
            }
            // Near separation the free coordinates keep drifting towards the
            // cap while the objective has flattened out.
            let at_cap = b0.abs() >= cap * (1.0 - 1e-9) || beta.iter().any(|b| b.abs() >= cap * (1.0 - 1e-9));
            if at_cap && decrease <= 1e-13 * obj.abs().max(1.0) {
                converged = true;
                break;
            }
        }

        let report = SolveReport { iterations, final_delta: delta, converged, wall_time: start.elapsed().as_secs_f64() };
        if !converged {
            return Err(Error::NotConverged { solver: "l1_logistic", report });
        }
        let bound = cap * (1.0 - 1e-9);
        let separation = b0.abs() >= bound || beta.iter().any(|b| b.abs() >= bound);
        if separation {
            log::warn!("logistic fit hit the coefficient cap {cap}: data look separable");
        }
        Ok(LogisticFit { intercept: b0, coefficients: beta, separation, report })
    }
}

/// One-shot fit with a scalar penalty on every slope.
pub fn l1_logistic(x: &DMatrix<f64>, y: &[f64], lambda: f64, opts: &LogisticOptions) -> Result<LogisticFit> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let problem = LogisticProblem::new(x, y)?;
    problem.fit(&vec![lambda; x.ncols()], None, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy() -> (DMatrix<f64>, Vec<f64>) {
        let x = DMatrix::from_row_slice(
            8,
            2,
            &[1., 0., 1., 1., 0., 1., 0., 0., 1., 0., 1., 1., 0., 0., 0., 1.],
        );
        let y = vec![1., 1., 0., 0., 0., 1., 1., 0.];
        (x, y)
    }

    #[test]
    fn above_lambda_max_gives_null_model() {
        let (x, y) = toy();
        let problem = LogisticProblem::new(&x, &y).unwrap();
        let lmax = problem.lambda_max();
        let fit = problem.fit(&[lmax * 1.0001, lmax * 1.0001], None, &LogisticOptions::default()).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        assert_relative_eq!(fit.intercept, 0.0, epsilon = 1e-9);
        // just below lambda_max the best column enters
        let fit = problem.fit(&[lmax * 0.9, lmax * 0.9], None, &LogisticOptions::default()).unwrap();
        assert!(fit.coefficients.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn kkt_holds() {
        let (x, y) = toy();
        let problem = LogisticProblem::new(&x, &y).unwrap();
        for lam in [0.0, 0.01, 0.05, 0.1] {
            let fit = problem.fit(&[lam, lam], None, &LogisticOptions::default()).unwrap();
            assert!(problem.kkt_residual(&[lam, lam], &fit) < 1e-7, "lambda {lam}");
        }
    }

    #[test]
    fn separable_data_flags_separation() {
        let x = DMatrix::from_row_slice(6, 2, &[1., 0., 0., 1., 1., 1., 0., 0., 1., 0., 0., 1.]);
        let y: Vec<f64> = (0..6).map(|i| x[(i, 0)]).collect();
        let fit = l1_logistic(&x, &y, 0.0, &LogisticOptions::default()).unwrap();
        assert!(fit.separation);
        assert!(fit.coefficients[0] > 20.0);
    }

    #[test]
    fn infinite_penalty_excludes_feature() {
        let (x, y) = toy();
        let problem = LogisticProblem::new(&x, &y).unwrap();
        let fit = problem.fit(&[0.0, f64::INFINITY], None, &LogisticOptions::default()).unwrap();
        assert_eq!(fit.coefficients[1].to_bits(), 0.0f64.to_bits());
        assert!(fit.coefficients[0] != 0.0);
    }

    #[test]
    fn rejects_bad_response() {
        let (x, _) = toy();
        assert!(LogisticProblem::new(&x, &[0.5; 8]).is_err());
        assert!(LogisticProblem::new(&x, &[1.0; 3]).is_err());
    }
}
