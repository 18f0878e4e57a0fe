//! Exact Ising-model quantities and the Gaussian surrogates of spin data.
//!
//! The model over `x in {0,1}^p` is
//!
//! ```text
//! P(x; theta) = exp( sum_k theta_kk x_k + sum_{k<l} theta_kl x_k x_l - A(theta) )
//! ```
//!
//! with `A` the log-partition function. Everything that needs `A` enumerates
//! the `2^p` profiles and is therefore limited to `p <= P_MAX_EXACT`.

use nalgebra::DMatrix;

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::P_MAX_EXACT;

/// How a binary variable is coded in the exponent of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    /// `x in {0,1}`.
    ZeroOne,
    /// `z in {-1,1}`, `z = 2x - 1`.
    Spin,
}

/// Symmetric `p x p` coefficient matrix. The diagonal holds the main effects,
/// the off-diagonal entries the pairwise conditional log-odds coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    values: DMatrix<f64>,
}

impl ThetaMatrix {
    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "ThetaMatrix needs p >= 1");
        Self { values: DMatrix::zeros(p, p) }
    }

    /// Wraps a matrix, rejecting anything that is not square and exactly symmetric.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let p = values.nrows();
        if p == 0 || values.ncols() != p {
            return Err(Error::DimensionMismatch { expected: p.max(1), found: values.ncols() });
        }
        for k in 0..p {
            for l in k + 1..p {
                let (a, b) = (values[(k, l)], values[(l, k)]);
                if a != b && !(a.is_nan() && b.is_nan()) {
                    return Err(Error::InvalidArgument(format!(
                        "theta is not symmetric at ({k}, {l}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    /// Symmetrizes by averaging with the transpose.
    pub fn symmetrized(values: &DMatrix<f64>) -> Self {
        let sym = (values + values.transpose()) * 0.5;
        Self { values: sym }
    }

    pub fn from_diagonal(main: &[f64]) -> Self {
        let mut t = Self::zeros(main.len());
        for (k, &v) in main.iter().enumerate() {
            t.values[(k, k)] = v;
        }
        t
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[(k, l)]
    }

    pub fn main_effect(&self, k: usize) -> f64 {
        self.values[(k, k)]
    }

    pub fn set_main_effect(&mut self, k: usize, v: f64) {
        self.values[(k, k)] = v;
    }

    /// Sets both `(k, l)` and `(l, k)`.
    pub fn set_interaction(&mut self, k: usize, l: usize, v: f64) {
        self.values[(k, l)] = v;
        self.values[(l, k)] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Off-diagonal support with `|theta_kl| > threshold`.
    pub fn support(&self, threshold: f64) -> crate::EdgeSet {
        crate::EdgeSet::from_matrix(&self.values, threshold)
    }

    /// Re-expresses the same distribution under another coding (the additive
    /// constant is absorbed by the log-partition function).
    pub fn recode(&self, from: Coding, to: Coding) -> Self {
        let p = self.p();
        let mut out = self.values.clone();
        match (from, to) {
            (Coding::ZeroOne, Coding::ZeroOne) | (Coding::Spin, Coding::Spin) => {}
            (Coding::Spin, Coding::ZeroOne) => {
                for k in 0..p {
                    let coupling: f64 = (0..p).filter(|&l| l != k).map(|l| self.get(k, l)).sum();
                    out[(k, k)] = 2.0 * self.get(k, k) - 2.0 * coupling;
                    for l in 0..p {
                        if l != k {
                            out[(k, l)] = 4.0 * self.get(k, l);
                        }
                    }
                }
            }
            (Coding::ZeroOne, Coding::Spin) => {
                for k in 0..p {
                    let coupling: f64 = (0..p).filter(|&l| l != k).map(|l| self.get(k, l)).sum();
                    out[(k, k)] = 0.5 * self.get(k, k) + 0.25 * coupling;
                    for l in 0..p {
                        if l != k {
                            out[(k, l)] = 0.25 * self.get(k, l);
                        }
                    }
                }
            }
        }
        Self { values: out }
    }

    /// Block-diagonal matrix with `copies` copies of `self`.
    pub fn block_diagonal(&self, copies: usize) -> Self {
        let b = self.p();
        let mut out = DMatrix::zeros(b * copies, b * copies);
        for c in 0..copies {
            out.view_mut((c * b, c * b), (b, b)).copy_from(&self.values);
        }
        Self { values: out }
    }

    fn check_exact(&self) -> Result<()> {
        if self.p() > P_MAX_EXACT {
            return Err(Error::DimensionTooLarge { p: self.p(), max: P_MAX_EXACT });
        }
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(t))` without overflow.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Unnormalized log-weights of all `2^p` profiles; bit `k` of the index is `x_k`.
pub fn profile_log_weights(theta: &ThetaMatrix) -> Result<Vec<f64>> {
    theta.check_exact()?;
    let p = theta.p();
    let mut w = vec![0.0; 1usize << p];
    for s in 1usize..(1 << p) {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s ^ (1 << top);
        let mut e = theta.get(top, top);
        let mut bits = rest;
        while bits != 0 {
            let l = bits.trailing_zeros() as usize;
            e += theta.get(top, l);
            bits &= bits - 1;
        }
        w[s] = w[rest] + e;
    }
    Ok(w)
}

/// Log-partition function `A(theta)`, by enumeration with log-sum-exp.
pub fn log_partition(theta: &ThetaMatrix) -> Result<f64> {
    Ok(log_sum_exp(&profile_log_weights(theta)?))
}

/// Probabilities of all `2^p` profiles (bit `k` of the index is `x_k`).
pub fn profile_probabilities(theta: &ThetaMatrix) -> Result<Vec<f64>> {
    let w = profile_log_weights(theta)?;
    let a = log_sum_exp(&w);
    Ok(w.into_iter().map(|v| (v - a).exp()).collect())
}

/// Position of profile `x` in the enumeration order used by [`profile_probabilities`].
pub fn profile_index(x: &[u8]) -> usize {
    x.iter().enumerate().fold(0usize, |s, (k, &v)| s | ((v as usize) << k))
}

fn exponent(x: &[u8], theta: &ThetaMatrix) -> f64 {
    let p = theta.p();
    let mut e = 0.0;
    for k in 0..p {
        if x[k] == 1 {
            e += theta.get(k, k);
            for l in k + 1..p {
                if x[l] == 1 {
                    e += theta.get(k, l);
                }
            }
        }
    }
    e
}

/// `P(x; theta)`.
pub fn probability(x: &[u8], theta: &ThetaMatrix) -> Result<f64> {
    if x.len() != theta.p() {
        return Err(Error::DimensionMismatch { expected: theta.p(), found: x.len() });
    }
    let a = log_partition(theta)?;
    Ok((exponent(x, theta) - a).exp())
}

/// Exact log-likelihood `sum_{l>=k} (X^T X)_kl theta_kl - n A(theta)`.
pub fn exact_log_likelihood(data: &BinaryDataset, theta: &ThetaMatrix) -> Result<f64> {
    check_dims(data, theta)?;
    let a = log_partition(theta)?;
    let g = data.gram();
    let p = theta.p();
    let mut s = 0.0;
    for k in 0..p {
        for l in k..p {
            s += g[(k, l)] * theta.get(k, l);
        }
    }
    Ok(s - data.n() as f64 * a)
}

/// Model moments: `E[x_k x_l]` off the diagonal and `E[x_k]` on it. This is
/// the gradient of `A` with respect to the upper-triangular parameters.
pub fn moments(theta: &ThetaMatrix) -> Result<DMatrix<f64>> {
    let probs = profile_probabilities(theta)?;
    let p = theta.p();
    let mut m = DMatrix::zeros(p, p);
    for (s, &pr) in probs.iter().enumerate() {
        if pr == 0.0 {
            continue;
        }
        let mut bits = s;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            let mut rest = bits;
            while rest != 0 {
                let l = rest.trailing_zeros() as usize;
                m[(k, l)] += pr;
                rest &= rest - 1;
            }
            bits &= bits - 1;
        }
    }
    m.fill_lower_triangle_with_upper_triangle();
    Ok(m)
}

/// Log pseudo-likelihood: the sum over observations and nodes of the log
/// full-conditional probability, each conditional being a logistic model of
/// `x_k` on the other variables with `theta_kk` as intercept.
pub fn pseudo_log_likelihood(data: &BinaryDataset, theta: &ThetaMatrix) -> Result<f64> {
    check_dims(data, theta)?;
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let p = theta.p();
    let mut total = 0.0;
    for row in data.rows() {
        for k in 0..p {
            let mut eta = theta.get(k, k);
            for l in 0..p {
                if l != k && row[l] == 1 {
                    eta += theta.get(k, l);
                }
            }
            let spin = 2.0 * f64::from(row[k]) - 1.0;
            total -= softplus(-spin * eta);
        }
    }
    Ok(total)
}

/// Conditional odds ratio between `x_k` and `x_l` given the rest.
pub fn conditional_odds_ratio(theta: &ThetaMatrix, k: usize, l: usize, coding: Coding) -> Result<f64> {
    let p = theta.p();
    if k >= p || l >= p || k == l {
        return Err(Error::IndexOutOfRange { k, l, p });
    }
    let t = theta.get(k, l);
    Ok(match coding {
        Coding::ZeroOne => t.exp(),
        Coding::Spin => (4.0 * t).exp(),
    })
}

fn check_dims(data: &BinaryDataset, theta: &ThetaMatrix) -> Result<()> {
    if data.p() != theta.p() {
        return Err(Error::DimensionMismatch { expected: theta.p(), found: data.p() });
    }
    Ok(())
}

/// Which Gaussian surrogate of the spin data to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurrogateKind {
    /// Spin covariance with `1/3` added to the diagonal.
    CovPlusThird,
    /// Spin covariance.
    Cov,
    /// Spin correlation.
    Cor,
}

/// A symmetric positive semidefinite matrix standing in for the sample
/// covariance in the graphical lasso.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateMatrix {
    pub kind: SurrogateKind,
    pub values: DMatrix<f64>,
    /// Spin sample means.
    pub means: Vec<f64>,
}

/// Builds the surrogate from the spin view of `data`, covariance divisor `n`.
pub fn gaussian_surrogate(data: &BinaryDataset, kind: SurrogateKind) -> Result<SurrogateMatrix> {
    let n = data.n();
    let p = data.p();
    if n < 2 {
        return Err(Error::InvalidArgument("the surrogate needs at least two observations".into()));
    }
    if let Some(&k) = data.constant_columns().first() {
        return Err(Error::ConstantColumn(k));
    }
    let nf = n as f64;
    let g = data.gram();
    // With z = 2x - 1: mean_z = 2q - 1 and cov_z = 4 (E[x_k x_l] - q_k q_l).
    let q: Vec<f64> = (0..p).map(|k| g[(k, k)] / nf).collect();
    let mut cov = DMatrix::from_fn(p, p, |k, l| 4.0 * (g[(k, l)] / nf - q[k] * q[l]));
    cov.fill_lower_triangle_with_upper_triangle();
    let values = match kind {
        SurrogateKind::Cov => cov,
        SurrogateKind::CovPlusThird => {
            for k in 0..p {
                cov[(k, k)] += 1.0 / 3.0;
            }
            cov
        }
        SurrogateKind::Cor => {
            let sd: Vec<f64> = (0..p).map(|k| cov[(k, k)].sqrt()).collect();
            DMatrix::from_fn(p, p, |k, l| if k == l { 1.0 } else { cov[(k, l)] / (sd[k] * sd[l]) })
        }
    };
    Ok(SurrogateMatrix { kind, values, means: q.iter().map(|&v| 2.0 * v - 1.0).collect() })
}

/// `log det(M) - tr(M S)`.
pub fn gaussian_log_likelihood(precision: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<f64> {
    let p = precision.nrows();
    if s.nrows() != p || s.ncols() != p || precision.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, found: s.nrows() });
    }
    let logdet = log_det_pd(precision)?;
    let trace: f64 = precision.iter().zip(s.iter()).map(|(a, b)| a * b).sum();
    Ok(logdet - trace)
}

/// Log-determinant of a symmetric positive definite matrix via Cholesky.
pub(crate) fn log_det_pd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn two_node(t12: f64) -> ThetaMatrix {
        let mut t = ThetaMatrix::zeros(2);
        t.set_interaction(0, 1, t12);
        t
    }

    #[test]
    fn log_partition_small_cases() {
        assert_relative_eq!(log_partition(&ThetaMatrix::zeros(1)).unwrap(), LN_2, epsilon = 1e-14);
        assert_relative_eq!(log_partition(&ThetaMatrix::zeros(10)).unwrap(), 10.0 * LN_2, epsilon = 1e-12);
        assert_relative_eq!(log_partition(&two_node(LN_2)).unwrap(), 5f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn log_partition_rejects_large_and_nan() {
        assert!(matches!(
            log_partition(&ThetaMatrix::zeros(P_MAX_EXACT + 1)),
            Err(Error::DimensionTooLarge { .. })
        ));
        let mut t = ThetaMatrix::zeros(3);
        t.set_main_effect(1, f64::NAN);
        assert!(matches!(log_partition(&t), Err(Error::NonFinite)));
    }

    #[test]
    fn log_partition_is_stable_for_huge_coefficients() {
        let mut t = ThetaMatrix::zeros(3);
        t.set_main_effect(0, 800.0);
        t.set_interaction(1, 2, 900.0);
        let a = log_partition(&t).unwrap();
        assert!(a.is_finite());
        assert_relative_eq!(a, 800.0 + 900.0, epsilon = 1e-9);
    }

    #[test]
    fn probability_examples() {
        assert_relative_eq!(probability(&[1, 0, 1], &ThetaMatrix::zeros(3)).unwrap(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(probability(&[1, 1], &two_node(LN_2)).unwrap(), 0.4, epsilon = 1e-14);
        assert!(probability(&[1, 1, 0], &two_node(0.0)).is_err());
    }

    #[test]
    fn null_model_log_likelihood() {
        let data = BinaryDataset::from_rows(&[
            vec![1, 0, 0, 1],
            vec![0, 0, 0, 0],
            vec![1, 1, 1, 1],
            vec![0, 1, 0, 1],
            vec![1, 1, 0, 0],
            vec![0, 0, 1, 1],
            vec![1, 0, 1, 0],
        ])
        .unwrap();
        let ll = exact_log_likelihood(&data, &ThetaMatrix::zeros(4)).unwrap();
        assert_relative_eq!(ll, 7.0 * (-4.0 * LN_2), epsilon = 1e-12);
        let pl = pseudo_log_likelihood(&data, &ThetaMatrix::zeros(4)).unwrap();
        assert_relative_eq!(pl, -28.0 * LN_2, epsilon = 1e-12);
    }

    #[test]
    fn single_observation_log_likelihood_is_log_probability() {
        let mut t = ThetaMatrix::zeros(3);
        t.set_main_effect(0, -0.4);
        t.set_interaction(0, 2, 1.1);
        t.set_interaction(1, 2, -0.3);
        let data = BinaryDataset::from_rows(&[vec![1, 0, 1]]).unwrap();
        let ll = exact_log_likelihood(&data, &t).unwrap();
        assert_relative_eq!(ll, probability(&[1, 0, 1], &t).unwrap().ln(), epsilon = 1e-13);
    }

    #[test]
    fn odds_ratio_codings() {
        let mut t = two_node(0.06);
        assert_relative_eq!(conditional_odds_ratio(&t, 0, 1, Coding::Spin).unwrap(), 0.24f64.exp());
        assert!((conditional_odds_ratio(&t, 0, 1, Coding::Spin).unwrap() - 1.27).abs() < 0.005);
        t.set_interaction(0, 1, LN_2);
        assert_relative_eq!(conditional_odds_ratio(&t, 1, 0, Coding::ZeroOne).unwrap(), 2.0, epsilon = 1e-14);
        t.set_interaction(0, 1, 0.0);
        assert_eq!(conditional_odds_ratio(&t, 0, 1, Coding::ZeroOne).unwrap(), 1.0);
        assert_eq!(conditional_odds_ratio(&t, 0, 1, Coding::Spin).unwrap(), 1.0);
        assert!(matches!(conditional_odds_ratio(&t, 0, 0, Coding::Spin), Err(Error::IndexOutOfRange { .. })));
        assert!(conditional_odds_ratio(&t, 0, 5, Coding::Spin).is_err());
    }

    #[test]
    fn recode_round_trip() {
        let mut t = ThetaMatrix::zeros(3);
        t.set_main_effect(0, 0.3);
        t.set_main_effect(2, -1.0);
        t.set_interaction(0, 1, 0.2);
        t.set_interaction(1, 2, -0.4);
        let back = t.recode(Coding::Spin, Coding::ZeroOne).recode(Coding::ZeroOne, Coding::Spin);
        assert!((back.as_matrix() - t.as_matrix()).amax() < 1e-14);
    }

    #[test]
    fn surrogate_of_equal_columns_has_unit_correlation() {
        let data = BinaryDataset::from_rows(&[vec![1, 1, 0], vec![0, 0, 0], vec![1, 1, 1], vec![0, 0, 1]]).unwrap();
        let s = gaussian_surrogate(&data, SurrogateKind::Cor).unwrap();
        assert_relative_eq!(s.values[(0, 1)], 1.0, epsilon = 1e-14);
        assert_eq!(s.values[(2, 2)], 1.0);
    }

    #[test]
    fn surrogate_rejects_constant_column() {
        let data = BinaryDataset::from_rows(&[vec![1, 1], vec![0, 1], vec![1, 1]]).unwrap();
        assert!(matches!(gaussian_surrogate(&data, SurrogateKind::Cor), Err(Error::ConstantColumn(1))));
        let one_row = BinaryDataset::from_rows(&[vec![1, 0]]).unwrap();
        assert!(gaussian_surrogate(&one_row, SurrogateKind::Cov).is_err());
    }

    #[test]
    fn gaussian_log_likelihood_identity() {
        let i = DMatrix::<f64>::identity(4, 4);
        assert_relative_eq!(gaussian_log_likelihood(&i, &i).unwrap(), -4.0, epsilon = 1e-14);
        let neg = -DMatrix::<f64>::identity(2, 2);
        assert!(matches!(gaussian_log_likelihood(&neg, &i.view((0, 0), (2, 2)).into_owned()), Err(Error::NotPositiveDefinite)));
    }
}
