//! Convex solvers behind the structure-learning methods.
//!
//! - [`glasso`]: graphical lasso with per-entry penalties, block coordinate descent.
//! - [`logistic`]: l1-penalized logistic regression by proximal Newton with
//!   coordinate descent inner solves.
//! - [`pseudo`]: symmetric l1-penalized pseudo-likelihood, same scheme over all
//!   node-wise logistic models at once.
//! - [`exact`]: exact Ising MLE under a prescribed zero pattern (small p only).
//!
//! Penalties of `+inf` mean "this entry is fixed at zero": the coordinate is
//! never visited and stays bitwise `0.0`.

pub mod exact;
pub mod glasso;
pub mod logistic;
pub mod pseudo;

pub use exact::{exact_constrained_mle, ExactOptions};
pub use glasso::{glasso, glasso_kkt_residual, GlassoFit, GlassoOptions};
pub use logistic::{l1_logistic, LogisticFit, LogisticOptions, LogisticProblem};
pub use pseudo::{pseudo_kkt_residual, pseudo_likelihood_fit, PseudoOptions};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::EdgeSet;

/// Penalty applied to the off-diagonal entries. Diagonal entries are never penalized.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltySpec {
    Scalar(f64),
    /// Symmetric matrix of per-entry penalties in `[0, +inf]`.
    Matrix(DMatrix<f64>),
}

impl PenaltySpec {
    pub fn scalar(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self::Scalar(lambda))
    }

    pub fn matrix(m: DMatrix<f64>) -> Result<Self> {
        let p = m.nrows();
        if m.ncols() != p {
            return Err(Error::DimensionMismatch { expected: p, found: m.ncols() });
        }
        for k in 0..p {
            for l in 0..p {
                let v = m[(k, l)];
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!("penalty ({k}, {l}) = {v} is not in [0, inf]")));
                }
                if v != m[(l, k)] {
                    return Err(Error::InvalidArgument(format!("penalty matrix not symmetric at ({k}, {l})")));
                }
            }
        }
        Ok(Self::Matrix(m))
    }

    /// Zero penalty on `support` and `+inf` elsewhere: the un-penalized fit
    /// restricted to a given edge set.
    pub fn restricted_to(support: &EdgeSet) -> Self {
        let p = support.p();
        let m = DMatrix::from_fn(p, p, |k, l| {
            if k == l || support.contains(k, l) {
                0.0
            } else {
                f64::INFINITY
            }
        });
        Self::Matrix(m)
    }

    #[inline]
    pub fn weight(&self, k: usize, l: usize) -> f64 {
        if k == l {
            return 0.0;
        }
        match self {
            Self::Scalar(v) => *v,
            Self::Matrix(m) => m[(k, l)],
        }
    }

    pub(crate) fn check_dim(&self, p: usize) -> Result<()> {
        match self {
            Self::Scalar(_) => Ok(()),
            Self::Matrix(m) if m.nrows() == p => Ok(()),
            Self::Matrix(m) => Err(Error::DimensionMismatch { expected: p, found: m.nrows() }),
        }
    }
}

/// Convergence summary of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Solver-specific convergence measure at exit (average change, step or gradient norm).
    pub final_delta: f64,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
}

/// Options for every solver, bundled so that paths and refits share them.
#[derive(Debug, Clone, Default)]
pub struct SolverOptions {
    pub glasso: GlassoOptions,
    pub logistic: LogisticOptions,
    pub pseudo: PseudoOptions,
    pub exact: ExactOptions,
}

#[inline]
pub(crate) fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}
