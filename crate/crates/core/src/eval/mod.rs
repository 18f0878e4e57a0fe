//! Scoring estimated graphs against a truth or against each other, the
//! approximate-deviance comparison, and the replicate benchmark runner.

mod benchmark;
mod deviance;

pub use benchmark::{run_benchmark, AgreementRow, AggregateRow, BenchmarkReport, BenchmarkRow, SelectionMode};
pub use deviance::{deviance_curves, DevianceRow};

use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::ising::ThetaMatrix;

/// Confusion counts over the `p (p - 1) / 2` unordered pairs and the rates
/// derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionSummary {
    pub pos: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Compares an estimated edge set with the true one. Empty denominators take
/// the conventional values: TPR 1 for an empty truth, FPR 0 for a complete
/// truth, precision 1 for an empty estimate.
pub fn confusion(estimated: &EdgeSet, truth: &EdgeSet) -> Result<ConfusionSummary> {
    if estimated.p() != truth.p() {
        return Err(Error::DimensionMismatch { expected: truth.p(), found: estimated.p() });
    }
    let pairs = truth.pair_count();
    let pos = estimated.len();
    let tp = estimated.as_set().intersection(truth.as_set()).count();
    let fp = pos - tp;
    let fn_ = truth.len() - tp;
    let tn = pairs - tp - fp - fn_;
    let ratio = |num: usize, den: usize, empty: f64| if den == 0 { empty } else { num as f64 / den as f64 };
    let tpr = ratio(tp, tp + fn_, 1.0);
    let fpr = ratio(fp, fp + tn, 0.0);
    let precision = ratio(tp, pos, 1.0);
    let accuracy = ratio(tp + tn, pairs, 1.0);
    let f1 = if precision + tpr > 0.0 { 2.0 * precision * tpr / (precision + tpr) } else { 0.0 };
    Ok(ConfusionSummary { pos, tp, fp, fn_, tn, tpr, fpr, precision, accuracy, f1 })
}

/// Overlap `kappa = |E1 & E2| / min(|E1|, |E2|)` and disagreement
/// `kappa_bar = |E1 ^ E2|` between two edge sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    /// Set to 1 when either edge set is empty.
    pub kappa: f64,
    pub kappa_bar: usize,
}

pub fn agreement(a: &EdgeSet, b: &EdgeSet) -> Result<Agreement> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { expected: a.p(), found: b.p() });
    }
    Ok(set_agreement(a.as_set(), b.as_set()))
}

/// [`agreement`] for arbitrary sets, e.g. edges keyed by variable names.
pub fn set_agreement<T: Ord>(a: &std::collections::BTreeSet<T>, b: &std::collections::BTreeSet<T>) -> Agreement {
    let smaller = a.len().min(b.len());
    let common = a.intersection(b).count();
    let kappa = if smaller == 0 {
        log::debug!("agreement with an empty edge set is set to 1");
        1.0
    } else {
        common as f64 / smaller as f64
    };
    Agreement { kappa, kappa_bar: a.len() + b.len() - 2 * common }
}

/// `1000 * sum_{k>l} (est - truth)^2 / #{k>l : truth != 0}`. Both matrices
/// must use the same coding.
pub fn odds_ratio_mse(estimated: &ThetaMatrix, truth: &ThetaMatrix) -> Result<f64> {
    let p = truth.p();
    if estimated.p() != p {
        return Err(Error::DimensionMismatch { expected: p, found: estimated.p() });
    }
    let mut sq = 0.0;
    let mut edges = 0usize;
    for k in 0..p {
        for l in 0..k {
            let d = estimated.get(k, l) - truth.get(k, l);
            sq += d * d;
            if truth.get(k, l) != 0.0 {
                edges += 1;
            }
        }
    }
    if edges == 0 {
        return Err(Error::NoTrueEdges);
    }
    Ok(1000.0 * sq / edges as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ten_of_45() -> EdgeSet {
        EdgeSet::from_pairs(10, (0..10).map(|k| (k, (k + 1) % 10))).unwrap()
    }

    #[test]
    fn confusion_exact_and_one_swap() {
        let truth = ten_of_45();
        let c = confusion(&truth, &truth).unwrap();
        assert_eq!((c.accuracy, c.f1, c.fpr), (1.0, 1.0, 0.0));

        let mut est: Vec<_> = truth.iter().skip(1).collect();
        est.push((0, 5));
        let c = confusion(&EdgeSet::from_pairs(10, est).unwrap(), &truth).unwrap();
        assert_relative_eq!(c.tpr, 0.9);
        assert_relative_eq!(c.fpr, 1.0 / 35.0);
        assert_relative_eq!(c.precision, 0.9);
        assert_relative_eq!(c.accuracy, 43.0 / 45.0);
        assert_eq!(c.tp + c.fp + c.fn_ + c.tn, 45);
    }

    #[test]
    fn confusion_empty_estimate() {
        let c = confusion(&EdgeSet::empty(10), &ten_of_45()).unwrap();
        assert_eq!((c.tpr, c.fpr, c.precision, c.f1), (0.0, 0.0, 1.0, 0.0));
        assert_relative_eq!(c.accuracy, 35.0 / 45.0);
    }

    #[test]
    fn agreement_examples() {
        let a = EdgeSet::from_pairs(6, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let b = EdgeSet::from_pairs(6, [(0, 2), (0, 3), (1, 4), (2, 5)]).unwrap();
        let g = agreement(&a, &b).unwrap();
        assert_relative_eq!(g.kappa, 2.0 / 3.0);
        assert_eq!(g.kappa_bar, 3);
        let c = EdgeSet::from_pairs(6, [(4, 5)]).unwrap();
        assert_eq!(agreement(&a, &c).unwrap(), Agreement { kappa: 0.0, kappa_bar: 4 });
        assert_eq!(agreement(&a, &a).unwrap(), Agreement { kappa: 1.0, kappa_bar: 0 });
    }

    #[test]
    fn mse_single_edge() {
        let mut truth = ThetaMatrix::zeros(4);
        truth.set_interaction(1, 2, 0.4);
        let mut est = truth.clone();
        est.set_interaction(1, 2, 0.3);
        assert_relative_eq!(odds_ratio_mse(&est, &truth).unwrap(), 10.0, epsilon = 1e-9);
        assert_eq!(odds_ratio_mse(&truth, &truth).unwrap(), 0.0);
        assert!(matches!(odds_ratio_mse(&est, &ThetaMatrix::zeros(4)), Err(Error::NoTrueEdges)));
    }
}
