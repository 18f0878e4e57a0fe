//! Independent reference computations shared by the integration tests. Each
//! one is written from the textbook definition with no code from the library
//! beyond its data containers.

#![allow(dead_code)]

use isinglab::{BinaryDataset, ThetaMatrix};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

/// Unnormalized log weight `sum_k theta_kk x_k + sum_{k<l} theta_kl x_k x_l`.
pub fn log_weight(theta: &ThetaMatrix, x: &[u8]) -> f64 {
    let p = x.len();
    let mut w = 0.0;
    for k in 0..p {
        if x[k] == 0 {
            continue;
        }
        w += theta.get(k, k);
        for l in k + 1..p {
            if x[l] == 1 {
                w += theta.get(k, l);
            }
        }
    }
    w
}

/// Every profile of length `p`, profile `s` having bit `k` as `x_k`.
pub fn all_profiles(p: usize) -> Vec<Vec<u8>> {
    (0..1usize << p).map(|s| (0..p).map(|k| ((s >> k) & 1) as u8).collect()).collect()
}

/// `log sum_x exp(weight(x))`, shifted by the largest weight.
pub fn brute_log_partition(theta: &ThetaMatrix) -> f64 {
    let w: Vec<f64> = all_profiles(theta.p()).iter().map(|x| log_weight(theta, x)).collect();
    let top = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + w.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

pub fn brute_probabilities(theta: &ThetaMatrix) -> Vec<f64> {
    let a = brute_log_partition(theta);
    all_profiles(theta.p()).iter().map(|x| (log_weight(theta, x) - a).exp()).collect()
}

/// Exact log-likelihood by summing per-row log probabilities.
pub fn brute_log_likelihood(data: &BinaryDataset, theta: &ThetaMatrix) -> f64 {
    let a = brute_log_partition(theta);
    data.rows().map(|x| log_weight(theta, x) - a).sum()
}

/// Pseudo-log-likelihood written directly from the full conditionals.
pub fn brute_pseudo_log_likelihood(data: &BinaryDataset, theta: &ThetaMatrix) -> f64 {
    let p = data.p();
    let mut total = 0.0;
    for x in data.rows() {
        for k in 0..p {
            let eta = theta.get(k, k) + (0..p).filter(|&l| l != k).map(|l| theta.get(k, l) * x[l] as f64).sum::<f64>();
            let p1 = 1.0 / (1.0 + (-eta).exp());
            total += if x[k] == 1 { p1.ln() } else { (1.0 - p1).ln() };
        }
    }
    total
}

/// Symmetric coefficients with entries uniform on `[-scale, scale]`.
pub fn random_theta<R: Rng>(rng: &mut R, p: usize, scale: f64) -> ThetaMatrix {
    let mut t = ThetaMatrix::zeros(p);
    for k in 0..p {
        t.set_main_effect(k, rng.random_range(-scale..scale));
        for l in k + 1..p {
            t.set_interaction(k, l, rng.random_range(-scale..scale));
        }
    }
    t
}

/// Unpenalized logistic regression by plain Newton iterations on a dense
/// design with an intercept column prepended. Returns `(intercept, slopes)`.
pub fn newton_logistic(x: &DMatrix<f64>, y: &[f64]) -> (f64, Vec<f64>) {
    let (n, m) = x.shape();
    let design = DMatrix::from_fn(n, m + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let mut beta = DVector::zeros(m + 1);
    for _ in 0..100 {
        let eta = &design * &beta;
        let prob = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
        let w = prob.map(|q| q * (1.0 - q));
        let grad = design.transpose() * (DVector::from_column_slice(y) - &prob);
        let mut hess = DMatrix::zeros(m + 1, m + 1);
        for i in 0..n {
            let row = design.row(i);
            hess += w[i] * row.transpose() * row;
        }
        let step = hess.cholesky().expect("positive definite Hessian").solve(&grad);
        beta += &step;
        if step.amax() < 1e-13 {
            break;
        }
    }
    (beta[0], beta.iter().skip(1).cloned().collect())
}

/// `log det M - tr(M S)` with the determinant from the eigenvalues.
pub fn eigen_gaussian_log_likelihood(m: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let logdet: f64 = eig.eigenvalues.iter().map(|v| v.ln()).sum();
    logdet - (m * s).trace()
}

/// Graphical lasso solution for a 2 x 2 input with off-diagonal penalty
/// `lambda`: the covariance keeps the diagonal and soft-thresholds the
/// off-diagonal entry. Returns `(W, W^-1)`.
pub fn glasso_two_by_two(s: &DMatrix<f64>, lambda: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let c = s[(0, 1)];
    let w01 = c.signum() * (c.abs() - lambda).max(0.0);
    let w = DMatrix::from_row_slice(2, 2, &[s[(0, 0)], w01, w01, s[(1, 1)]]);
    let det = w[(0, 0)] * w[(1, 1)] - w01 * w01;
    let m = DMatrix::from_row_slice(2, 2, &[w[(1, 1)] / det, -w01 / det, -w01 / det, w[(0, 0)] / det]);
    (w, m)
}

/// Pearson statistic of observed counts against expected probabilities,
/// pooling cells whose expected count is below 5 into one. Returns
/// `(statistic, degrees of freedom)`.
pub fn pooled_chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &q) in counts.iter().zip(probs) {
        let e = q * nf;
        if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    (stat, cells - 1)
}

/// Maximizes a smooth concave `f` from `x0` with Newton steps built from
/// central finite differences, backtracking when a step does not improve.
pub fn numeric_maximize(f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Vec<f64> {
    let d = x0.len();
    let h = 1e-4;
    let mut x = x0.to_vec();
    let at = |x: &[f64], i: usize, di: f64, j: usize, dj: f64| {
        let mut y = x.to_vec();
        y[i] += di;
        y[j] += dj;
        f(&y)
    };
    for _ in 0..200 {
        let f0 = f(&x);
        let grad = DVector::from_fn(d, |i, _| (at(&x, i, h, i, 0.0) - at(&x, i, -h, i, 0.0)) / (2.0 * h));
        let mut hess = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                hess[(i, j)] = (at(&x, i, h, j, h) - at(&x, i, h, j, -h) - at(&x, i, -h, j, h) + at(&x, i, -h, j, -h))
                    / (4.0 * h * h);
            }
        }
        let step = match (-hess).cholesky() {
            Some(c) => c.solve(&grad),
            None => grad.clone(),
        };
        let mut t = 1.0;
        while t > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if f(&trial) >= f0 {
                x = trial;
                break;
            }
            t *= 0.5;
        }
        if grad.amax() < 1e-9 || t <= 1e-12 {
            break;
        }
    }
    x
}
