mod common;

use isinglab::datagen::{
    build_theta, replicate_rng, sample_auto, sample_exact, sample_gibbs, BaseDesign, DesignSpec, GibbsOptions,
};
use isinglab::ising::profile_index;
use isinglab::{Coding, ThetaMatrix};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn frequencies(data: &isinglab::BinaryDataset) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << data.p()];
    for x in data.rows() {
        counts[profile_index(x)] += 1;
    }
    counts
}

#[test]
fn uniform_model_frequencies() {
    let n = 100_000;
    let data = sample_exact(&ThetaMatrix::zeros(3), n, &mut replicate_rng(31, 0)).unwrap();
    let se = (0.125f64 * 0.875 / n as f64).sqrt();
    for c in frequencies(&data) {
        assert!((c as f64 / n as f64 - 0.125).abs() < 4.0 * se);
    }
}

#[test]
fn log_two_coupling_cell() {
    let mut theta = ThetaMatrix::zeros(2);
    theta.set_interaction(0, 1, 2f64.ln());
    let n = 100_000;
    let data = sample_exact(&theta, n, &mut replicate_rng(32, 0)).unwrap();
    let both = frequencies(&data)[3] as f64 / n as f64;
    assert!((both - 0.4).abs() < 4.0 * (0.4f64 * 0.6 / n as f64).sqrt());
}

#[test]
fn table_log_odds_recovers_coupling() {
    let mut theta = ThetaMatrix::from_diagonal(&[-0.4, 0.3]);
    theta.set_interaction(0, 1, 0.7);
    let data = sample_exact(&theta, 1_000_000, &mut replicate_rng(33, 0)).unwrap();
    let c = frequencies(&data).iter().map(|&v| v as f64).collect::<Vec<_>>();
    let log_odds = (c[3] * c[0] / (c[1] * c[2])).ln();
    assert!((log_odds - 0.7).abs() < 0.02, "{log_odds}");
}

#[test]
fn gibbs_with_main_effects_only_has_right_marginals() {
    let main = [-1.0, 0.0, 0.8];
    let n = 100_000;
    let data = sample_gibbs(&ThetaMatrix::from_diagonal(&main), n, &GibbsOptions::default(), &mut replicate_rng(34, 0)).unwrap();
    for (k, q) in data.column_means().into_iter().enumerate() {
        let expected = 1.0 / (1.0 + (-main[k]).exp());
        assert!((q - expected).abs() < 4.0 * (expected * (1.0 - expected) / n as f64).sqrt());
    }
}

#[test]
fn gibbs_null_model_passes_independence_test() {
    let n = 100_000;
    let data = sample_gibbs(&ThetaMatrix::zeros(4), n, &GibbsOptions::default(), &mut replicate_rng(35, 0)).unwrap();
    let (stat, df) = common::pooled_chi_square(&frequencies(&data), &[1.0 / 16.0; 16]);
    let p_value = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    assert!(p_value > 0.001, "p = {p_value}");
}

#[test]
fn samplers_are_deterministic_per_seed() {
    let design = build_theta(&DesignSpec::new(BaseDesign::T3, 2)).unwrap();
    let a = sample_exact(&design.theta, 500, &mut replicate_rng(7, 3)).unwrap();
    let b = sample_exact(&design.theta, 500, &mut replicate_rng(7, 3)).unwrap();
    let c = sample_exact(&design.theta, 500, &mut replicate_rng(7, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let g1 = sample_auto(&design.theta, 200, &GibbsOptions::default(), &mut replicate_rng(1, 0)).unwrap();
    let g2 = sample_auto(&design.theta, 200, &GibbsOptions::default(), &mut replicate_rng(1, 0)).unwrap();
    assert_eq!(g1, g2);
}

#[test]
fn t2_values_and_diagonal() {
    let d = build_theta(&DesignSpec::new(BaseDesign::T2, 4)).unwrap();
    assert_eq!(d.coding, Coding::Spin);
    for k in 0..10 {
        assert!((d.native.get(k, k) - (-1.3 + 1.3 * k as f64 / 9.0)).abs() < 1e-12);
        for l in k + 1..10 {
            let v = d.native.get(k, l);
            assert!(v == 0.0 || (v.abs() - 0.2).abs() < 1e-15);
            assert_eq!(v != 0.0, d.truth.contains(k, l));
        }
    }
    // sampling coefficients are the {0,1} form of the native ones
    assert!((d.theta.as_matrix() - d.native.recode(Coding::Spin, Coding::ZeroOne).as_matrix()).amax() < 1e-12);
}

#[test]
fn t1_edges_clear_the_threshold() {
    for seed in 0..20 {
        let d = build_theta(&DesignSpec::new(BaseDesign::T1, seed)).unwrap();
        assert!(!d.truth.is_empty());
        for (k, l) in d.truth.iter() {
            assert!(d.native.get(k, l).abs() > 0.06);
        }
    }
}

#[test]
fn t5_edge_count_is_binomial() {
    // Binomial(1225, 0.1): mean 122.5, sd 10.5
    let counts: Vec<usize> = (0..5).map(|s| build_theta(&DesignSpec::new(BaseDesign::T5, s)).unwrap().truth.len()).collect();
    for c in counts {
        assert!((c as f64 - 122.5).abs() < 3.0 * 10.5, "{c}");
    }
    let d = build_theta(&DesignSpec::new(BaseDesign::T5, 0)).unwrap();
    for (k, l) in d.truth.iter() {
        let v = d.native.get(k, l);
        assert!((v - 2f64.ln()).abs() < 1e-15 || (v - 1.5f64.ln()).abs() < 1e-15);
    }
}

#[test]
fn block_design_has_no_cross_block_entries() {
    let d = build_theta(&DesignSpec::block(BaseDesign::T1, 5, 5)).unwrap();
    assert_eq!(d.p(), 50);
    for k in 0..50 {
        for l in 0..50 {
            if k / 10 != l / 10 {
                assert_eq!(d.theta.get(k, l), 0.0);
            }
        }
    }
    let single = build_theta(&DesignSpec::new(BaseDesign::T1, 5)).unwrap();
    assert_eq!(d.truth.len(), 5 * single.truth.len());
}
