//! Exact maximum likelihood of a small Ising model under a prescribed set of
//! allowed interactions. Damped Newton steps with the gradient and Hessian of
//! the log-partition function obtained by enumerating all `2^p` profiles.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::SolveReport;
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::ising::{log_partition, logit, profile_probabilities, ThetaMatrix};
use crate::P_MAX_EXACT;

#[derive(Debug, Clone)]
pub struct ExactOptions {
    /// Converged when the sup-norm of the log-likelihood gradient is below `tol_scale * n`.
    pub tol_scale: f64,
    pub max_iter: usize,
    /// Bound on the magnitude of any coefficient; empty contingency cells push
    /// the maximizer to infinity.
    pub coef_cap: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { tol_scale: 1e-6, max_iter: 500, coef_cap: 30.0 }
    }
}

/// Maximizes the exact log-likelihood over symmetric `theta` whose off-diagonal
/// entries vanish outside `allowed`. Main effects are always free.
pub fn exact_constrained_mle(
    data: &BinaryDataset,
    allowed: &EdgeSet,
    warm_start: Option<&ThetaMatrix>,
    opts: &ExactOptions,
) -> Result<(ThetaMatrix, SolveReport)> {
    let start = Instant::now();
    let (n, p) = (data.n(), data.p());
    if p > P_MAX_EXACT {
        return Err(Error::DimensionTooLarge { p, max: P_MAX_EXACT });
    }
    if allowed.p() != p {
        return Err(Error::DimensionMismatch { expected: p, found: allowed.p() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("exact likelihood needs observations".into()));
    }
    let nf = n as f64;
    let params: Vec<(usize, usize)> = (0..p).map(|k| (k, k)).chain(allowed.iter()).collect();
    let d = params.len();
    let gram = data.gram();
    let target = DVector::from_iterator(d, params.iter().map(|&(k, l)| gram[(k, l)] / nf));

    let cap = opts.coef_cap;
    let mut x = match warm_start {
        Some(t) if t.p() == p && t.is_finite() => DVector::from_iterator(d, params.iter().map(|&(k, l)| t.get(k, l))),
        _ => DVector::from_iterator(
            d,
            params.iter().map(|&(k, l)| if k == l { logit(gram[(k, k)] / nf).clamp(-cap, cap) } else { 0.0 }),
        ),
    };

    // Profiles touched by each parameter, as bit masks.
    let masks: Vec<usize> = params.iter().map(|&(k, l)| (1usize << k) | (1usize << l)).collect();
    let theta_of = |x: &DVector<f64>| {
        let mut t = ThetaMatrix::zeros(p);
        for (j, &(k, l)) in params.iter().enumerate() {
            if k == l {
                t.set_main_effect(k, x[j]);
            } else {
                t.set_interaction(k, l, x[j]);
            }
        }
        t
    };
    // Mean negative log-likelihood per observation.
    let objective = |x: &DVector<f64>| -> Result<f64> { Ok(log_partition(&theta_of(x))? - target.dot(x)) };

    let mut obj = objective(&x)?;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    let mut active = Vec::with_capacity(d);
    while iterations < opts.max_iter {
        let probs = profile_probabilities(&theta_of(&x))?;
        let mut mean = DVector::zeros(d);
        let mut second = DMatrix::zeros(d, d);
        for (s, &pr) in probs.iter().enumerate() {
            if pr == 0.0 {
                continue;
            }
            active.clear();
            active.extend((0..d).filter(|&j| s & masks[j] == masks[j]));
            for (a, &i) in active.iter().enumerate() {
                mean[i] += pr;
                for &j in &active[a..] {
                    second[(i, j)] += pr;
                }
            }
        }
        second.fill_lower_triangle_with_upper_triangle();
        let grad = &mean - &target;
        grad_norm = grad.amax() * nf;
        if grad_norm <= opts.tol_scale * nf {
            converged = true;
            break;
        }
        iterations += 1;
        let mut hess = second - &mean * mean.transpose();
        for j in 0..d {
            hess[(j, j)] += 1e-12;
        }
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&(-&grad)),
            None => -&grad,
        };
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let trial = (&x + &step * t).map(|v| v.clamp(-cap, cap));
            let f = objective(&trial)?;
            if f <= obj + 1e-4 * t * slope || f <= obj - 1e-15 * obj.abs().max(1.0) {
                x = trial;
                obj = f;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let report = SolveReport { iterations, final_delta: grad_norm, converged, wall_time: start.elapsed().as_secs_f64() };
    if !converged {
        return Err(Error::NotConverged { solver: "exact_mle", report });
    }
    Ok((theta_of(&x), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table_data(counts: [usize; 4]) -> BinaryDataset {
        // counts of (0,0), (1,0), (0,1), (1,1)
        let cells = [[0u8, 0], [1, 0], [0, 1], [1, 1]];
        let rows: Vec<Vec<u8>> =
            cells.iter().zip(counts).flat_map(|(c, m)| std::iter::repeat_n(c.to_vec(), m)).collect();
        BinaryDataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn independence_gives_marginal_logits() {
        let d = table_data([10, 20, 5, 15]);
        let (theta, _) = exact_constrained_mle(&d, &EdgeSet::empty(2), None, &ExactOptions::default()).unwrap();
        assert_relative_eq!(theta.main_effect(0), logit(35.0 / 50.0), epsilon = 1e-7);
        assert_relative_eq!(theta.main_effect(1), logit(20.0 / 50.0), epsilon = 1e-7);
        assert_eq!(theta.get(0, 1), 0.0);
    }

    #[test]
    fn saturated_two_by_two_closed_form() {
        let [n00, n10, n01, n11]: [f64; 4] = [10.0, 20.0, 5.0, 15.0];
        let d = table_data([10, 20, 5, 15]);
        let (theta, _) = exact_constrained_mle(&d, &EdgeSet::complete(2), None, &ExactOptions::default()).unwrap();
        assert_relative_eq!(theta.main_effect(0), (n10 / n00).ln(), epsilon = 1e-6);
        assert_relative_eq!(theta.main_effect(1), (n01 / n00).ln(), epsilon = 1e-6);
        assert_relative_eq!(theta.get(0, 1), (n11 * n00 / (n10 * n01)).ln(), epsilon = 1e-6);
    }

    #[test]
    fn rejects_large_p() {
        let d = BinaryDataset::new(1, 21, vec![0; 21], crate::data::default_names(21)).unwrap();
        assert!(matches!(
            exact_constrained_mle(&d, &EdgeSet::empty(21), None, &ExactOptions::default()),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
