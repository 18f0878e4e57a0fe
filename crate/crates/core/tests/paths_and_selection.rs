mod common;

use isinglab::datagen::{build_theta, replicate_rng, sample_exact, BaseDesign, DesignSpec};
use isinglab::eval::{agreement, confusion};
use isinglab::methods::{default_grid, fit_path, fit_paths, intersect_models, lambda_max, Family, MethodId};
use isinglab::selection::{bic_select, make_grid, oracle_select, unshrunk_refit, Refitter};
use isinglab::ising::{gaussian_log_likelihood, gaussian_surrogate, pseudo_log_likelihood};
use isinglab::{EdgeSet, LambdaGrid, SolverOptions, ThetaMatrix};

fn t3_data(seed: u64, n: usize) -> (isinglab::datagen::Design, isinglab::BinaryDataset) {
    let design = build_theta(&DesignSpec::new(BaseDesign::T3, 5)).unwrap();
    let data = sample_exact(&design.theta, n, &mut replicate_rng(seed, 0)).unwrap();
    (design, data)
}

#[test]
fn lambda_max_empties_every_method() {
    let (_, data) = t3_data(41, 800);
    let opts = SolverOptions::default();
    for m in MethodId::ALL {
        let grid = default_grid(&data, m).unwrap();
        assert_eq!(grid.values()[0], lambda_max(&data, m).unwrap());
        let path = fit_path(&data, m, &grid, &opts).unwrap();
        assert_eq!(path.len(), 50);
        assert!(path[0].edges.is_empty(), "{m}");
        assert!(!path[49].edges.is_empty(), "{m}");
    }
}

#[test]
fn and_is_contained_in_or() {
    let (_, data) = t3_data(42, 600);
    let paths = fit_paths(&data, &[MethodId::SepLogitAnd, MethodId::SepLogitOr], 30, 1000.0, &SolverOptions::default());
    let and = &paths[0].as_ref().unwrap().path;
    let or = &paths[1].as_ref().unwrap().path;
    for (a, o) in and.iter().zip(or) {
        assert_eq!(a.lambda, o.lambda);
        assert!(a.edges.is_subset(&o.edges));
    }
}

#[test]
fn shared_paths_match_single_fits() {
    let (_, data) = t3_data(43, 500);
    let opts = SolverOptions::default();
    let methods = [MethodId::BmnPseudo, MethodId::BmnPseudoHalf, MethodId::GaussCor];
    let shared = fit_paths(&data, &methods, 20, 100.0, &opts);
    for (m, s) in methods.iter().zip(shared) {
        let grid = make_grid(lambda_max(&data, *m).unwrap(), 20, 100.0).unwrap();
        let single = fit_path(&data, *m, &grid, &opts).unwrap();
        let s = s.unwrap();
        for (a, b) in s.path.iter().zip(&single) {
            assert_eq!(a.edges, b.edges);
        }
    }
}

#[test]
fn null_data_gives_near_empty_graphs_at_moderate_penalty() {
    // On null data lambda_max is itself a noise statistic, so a moderate
    // penalty is set on an absolute scale: four null standard errors of a
    // spin covariance, converted to each family's penalty units.
    let n = 2500;
    let data = sample_exact(&ThetaMatrix::zeros(10), n, &mut replicate_rng(44, 0)).unwrap();
    let opts = SolverOptions::default();
    for m in MethodId::ALL {
        let units = match m.family() {
            Family::SepLogit => 0.25,
            Family::Pseudo => 0.5,
            Family::Gaussian => 1.0,
        };
        let grid = LambdaGrid::from_values(vec![units * 4.0 / (n as f64).sqrt()]).unwrap();
        let path = fit_path(&data, m, &grid, &opts).unwrap();
        assert!(path[0].edges.len() <= 2, "{m}: {}", path[0].edges.len());
    }
}

#[test]
fn bic_on_null_data_selects_near_empty_graphs() {
    let opts = SolverOptions::default();
    let mut small = 0;
    for r in 0..50 {
        let data = sample_exact(&ThetaMatrix::zeros(10), 2500, &mut replicate_rng(45, r)).unwrap();
        let path = fit_path(&data, MethodId::GaussCor, &default_grid(&data, MethodId::GaussCor).unwrap(), &opts).unwrap();
        let (chosen, _) = bic_select(&data, &path, &opts).unwrap();
        if chosen.edges.len() <= 2 {
            small += 1;
        }
    }
    assert!(small >= 45, "{small} of 50");
}

#[test]
fn oracle_on_t3_recovers_the_graph() {
    let (design, data) = t3_data(46, 2500);
    let path = fit_path(&data, MethodId::GaussCor, &default_grid(&data, MethodId::GaussCor).unwrap(), &SolverOptions::default()).unwrap();
    let chosen = oracle_select(&path, &design.truth).unwrap();
    let c = confusion(&chosen.edges, &design.truth).unwrap();
    assert!(c.accuracy >= 44.0 / 45.0, "{c:?}");
    let empty = oracle_select(&path, &EdgeSet::empty(10)).unwrap();
    assert_eq!(empty.lambda, path[0].lambda);
}

#[test]
fn oracle_rejects_seplogit() {
    let (design, data) = t3_data(47, 300);
    let grid = make_grid(lambda_max(&data, MethodId::SepLogitOr).unwrap(), 5, 10.0).unwrap();
    let path = fit_path(&data, MethodId::SepLogitOr, &grid, &SolverOptions::default()).unwrap();
    assert!(oracle_select(&path, &design.truth).is_err());
}

#[test]
fn refits_preserve_zeros_and_improve_fit() {
    let (_, data) = t3_data(48, 1000);
    let opts = SolverOptions::default();
    for m in MethodId::ALL {
        let path = fit_path(&data, m, &default_grid(&data, m).unwrap(), &opts).unwrap();
        let est = &path[20];
        let refit = unshrunk_refit(&data, est, &opts).unwrap();
        for (k, l) in EdgeSet::complete(10).iter().filter(|e| !est.edges.contains(e.0, e.1)) {
            assert_eq!(refit.theta.get(k, l).to_bits(), 0f64.to_bits(), "{m}");
        }
        // the refit maximizes the unpenalized criterion over the pattern, so it
        // cannot do worse than the shrunk coefficients
        match m {
            MethodId::BmnPseudo | MethodId::BmnPseudoHalf => {
                let shrunk = pseudo_log_likelihood(&data, est.theta_shrunk.as_ref().unwrap()).unwrap();
                assert!(pseudo_log_likelihood(&data, &refit.theta).unwrap() >= shrunk - 1e-9, "{m}");
            }
            MethodId::GaussCov13 | MethodId::GaussCov | MethodId::GaussCor => {
                let s = gaussian_surrogate(&data, m.surrogate_kind().unwrap()).unwrap().values;
                let shrunk = gaussian_log_likelihood(est.precision.as_ref().unwrap(), &s).unwrap();
                let refitted = gaussian_log_likelihood(refit.precision.as_ref().unwrap(), &s).unwrap();
                assert!(refitted >= shrunk - 1e-9, "{m}");
            }
            _ => assert!(refit.directed.is_some()),
        }
    }
}

#[test]
fn gaussian_refit_on_empty_and_full_patterns() {
    let (_, data) = t3_data(49, 700);
    let opts = SolverOptions::default();
    let s = isinglab::ising::gaussian_surrogate(&data, isinglab::SurrogateKind::Cov).unwrap().values;
    let refitter = Refitter::new(&data, MethodId::GaussCov, &opts).unwrap();
    let empty = refitter.refit(&EdgeSet::empty(10), None).unwrap();
    let m = empty.precision.unwrap();
    for k in 0..10 {
        assert!((m[(k, k)] - 1.0 / s[(k, k)]).abs() < 1e-9);
    }
    let full = refitter.refit(&EdgeSet::complete(10), None).unwrap();
    let inv = s.clone().try_inverse().unwrap();
    assert!((full.precision.unwrap() - inv).amax() < 1e-6);
}

#[test]
fn bic_scores_decompose_and_count_the_diagonal() {
    let (_, data) = t3_data(50, 900);
    let opts = SolverOptions::default();
    let path = fit_path(&data, MethodId::BmnPseudoHalf, &default_grid(&data, MethodId::BmnPseudoHalf).unwrap(), &opts).unwrap();
    let (chosen, scores) = bic_select(&data, &path, &opts).unwrap();
    assert_eq!(scores[0].df, 10);
    let ln_n = (900f64).ln();
    for s in &scores {
        assert_eq!(s.score, s.loglik_term - s.df as f64 * ln_n);
    }
    let best = scores.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    let first_best = scores.iter().find(|s| s.score == best).unwrap();
    assert_eq!(chosen.lambda, first_best.lambda);
    assert!(chosen.theta_unshrunk.is_some());
}

#[test]
fn half_pseudo_selects_no_more_edges() {
    let opts = SolverOptions::default();
    let (mut full, mut half) = (0usize, 0usize);
    let design = build_theta(&DesignSpec::new(BaseDesign::T2, 5)).unwrap();
    for r in 0..5 {
        let data = sample_exact(&design.theta, 500, &mut replicate_rng(51, r)).unwrap();
        let paths = fit_paths(&data, &[MethodId::BmnPseudo, MethodId::BmnPseudoHalf], 50, 1000.0, &opts);
        let pick = |i: usize| bic_select(&data, &paths[i].as_ref().unwrap().path, &opts).unwrap().0.edges.len();
        full += pick(0);
        half += pick(1);
    }
    assert!(half <= full, "half {half} full {full}");
}

#[test]
fn intersection_is_conservative() {
    let (_, data) = t3_data(52, 500);
    let opts = SolverOptions::default();
    let paths = fit_paths(&data, &[MethodId::SepLogitOr, MethodId::GaussCor], 50, 1000.0, &opts);
    let a = bic_select(&data, &paths[0].as_ref().unwrap().path, &opts).unwrap().0;
    let b = bic_select(&data, &paths[1].as_ref().unwrap().path, &opts).unwrap().0;
    let both = intersect_models(&a, &b).unwrap();
    assert!(both.edges.len() <= a.edges.len().min(b.edges.len()));
    let g = agreement(&a.edges, &b.edges).unwrap();
    assert_eq!(g.kappa_bar, a.edges.len() + b.edges.len() - 2 * both.edges.len());
}
