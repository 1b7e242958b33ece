//! Behaviour of the boosting chain against closed-form expectations.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sglb::boosting::Booster;
use sglb::diagnostics::{estimate_p_infinity, gibbs_moment_test, isolating_dataset, GibbsConfig};
use sglb::trees::{LeafAssignment, SelectionParams};
use sglb::{
    compute_borders, generate_synthetic, quantize, BorderSet, Dataset, Loss, Mode, TrainConfig,
};

/// `P_ij = 1{same leaf} / |leaf|`, built entry by entry.
fn explicit_projector(a: &LeafAssignment) -> DMatrix<f64> {
    let sizes = a.leaf_sizes();
    let n = a.n_rows();
    DMatrix::from_fn(n, n, |i, j| {
        if a.leaves()[i] == a.leaves()[j] {
            1.0 / sizes[a.leaves()[i]] as f64
        } else {
            0.0
        }
    })
}

#[test]
fn one_step_is_a_preconditioned_langevin_update() {
    let d = generate_synthetic(120, 8).unwrap();
    let q = quantize(&d, &compute_borders(&d, 8).unwrap()).unwrap();
    let config = TrainConfig {
        mode: Mode::Sglb,
        loss: Loss::Sla { sigma: 0.1 },
        learning_rate: 0.05,
        diffusion_temperature: 50.0,
        model_shrink_rate: 0.3,
        depth: 3,
        border_count: 8,
        iterations: 40,
        seed: 4,
        ..TrainConfig::default()
    };
    let mut booster = Booster::new(&config, &q).unwrap();
    let eps = config.learning_rate;
    let gamma = config.model_shrink_rate;
    let s = (2.0 * 120.0 / (eps * config.diffusion_temperature)).sqrt();
    assert_eq!(booster.noise_scale(), s);
    for _ in 0..config.iterations {
        let before = DVector::from_column_slice(booster.predictions());
        let step = booster.step().unwrap();
        let zeta = DVector::from_vec(step.value_noise.clone().expect("sglb draws value noise"));
        let g = DVector::from_vec(step.gradient.clone());
        let p = explicit_projector(&step.leaves);
        let expected = &before * (1.0 - gamma * eps) - (&p * (g + zeta * s)) * eps;
        let after = DVector::from_column_slice(booster.predictions());
        let err = (&after - &expected).amax();
        assert!(err <= 1e-10, "deviation {err:e}");
    }
}

#[test]
fn gradient_boosting_step_has_no_noise_or_shrinkage() {
    let d = generate_synthetic(80, 3).unwrap();
    let q = quantize(&d, &compute_borders(&d, 6).unwrap()).unwrap();
    let config = TrainConfig {
        mode: Mode::Gb,
        depth: 2,
        border_count: 6,
        iterations: 10,
        ..TrainConfig::default()
    };
    let mut booster = Booster::new(&config, &q).unwrap();
    for _ in 0..10 {
        let before = DVector::from_column_slice(booster.predictions());
        let step = booster.step().unwrap();
        assert!(step.value_noise.is_none());
        let p = explicit_projector(&step.leaves);
        let expected = before - (&p * DVector::from_vec(step.gradient)) * config.learning_rate;
        assert!((DVector::from_column_slice(booster.predictions()) - expected).amax() <= 1e-12);
    }
}

#[test]
fn p_infinity_identity_partition_is_exact() {
    let q = isolating_dataset(&[0.0; 8]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let est = estimate_p_infinity(&q, &SelectionParams::deterministic(), 3, 20, &mut rng).unwrap();
    assert_eq!(est.matrix, DMatrix::identity(8, 8) * 8.0);
    assert!(est.min_eigenvalue_on_span() > 0.0);
}

#[test]
fn p_infinity_single_candidate_is_deterministic() {
    let d = Dataset::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], 1, vec![0.0; 5]).unwrap();
    let q = quantize(&d, &BorderSet::new(vec![vec![1.5]]).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let est = estimate_p_infinity(&q, &SelectionParams::deterministic(), 1, 50, &mut rng).unwrap();
    let split = LeafAssignment::new(vec![1, 1, 0, 0, 0], 2).unwrap();
    let expected = explicit_projector(&split) * 5.0;
    assert!((&est.matrix - expected).amax() < 1e-12);
    assert_eq!(est.standard_errors.amax(), 0.0);
}

#[test]
fn p_infinity_symmetric_candidates_average() {
    // feature 0 splits {0,1}|{2,3}; feature 1 splits {0,2}|{1,3}
    let d = Dataset::new(
        vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0],
        2,
        vec![0.0; 4],
    )
    .unwrap();
    let q = quantize(&d, &BorderSet::new(vec![vec![0.5], vec![0.5]]).unwrap()).unwrap();
    let sel = SelectionParams {
        random_strength: 1e6,
        learning_rate: 0.0,
        iteration: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let est = estimate_p_infinity(&q, &sel, 1, 20_000, &mut rng).unwrap();
    let p1 = explicit_projector(&LeafAssignment::new(vec![1, 1, 0, 0], 2).unwrap());
    let p2 = explicit_projector(&LeafAssignment::new(vec![1, 0, 1, 0], 2).unwrap());
    let expected = (p1 + p2) * 2.0;
    for i in 0..4 {
        for j in 0..4 {
            let diff = (est.matrix[(i, j)] - expected[(i, j)]).abs();
            assert!(
                diff <= 3.0 * est.standard_errors[(i, j)] + 1e-12,
                "entry ({i},{j}) off by {diff}"
            );
        }
    }
    assert!(est.max_asymmetry_z() <= 3.0);
    assert!(est.min_eigenvalue_on_span() > 0.0);
}

#[test]
fn p_infinity_on_greedy_trees_is_positive_on_span() {
    let d = generate_synthetic(30, 17).unwrap();
    let q = quantize(&d, &compute_borders(&d, 3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let est =
        estimate_p_infinity(&q, &SelectionParams::deterministic(), 2, 1000, &mut rng).unwrap();
    assert!(est.images.len() > 1);
    assert!(est.max_asymmetry_z() <= 3.0);
    assert!(est.min_eigenvalue_on_span() > 0.0);
}

#[test]
fn strong_shrinkage_pulls_the_chain_to_zero() {
    // lr * (1 + gamma) kept at 1e-2 so the chain stays stable
    let cfg = GibbsConfig {
        model_shrink_rate: 1e3,
        learning_rate: 1e-5,
        iterations: 2_000_000,
        burn_in: 100_000,
        ..GibbsConfig::reference()
    };
    let r = gibbs_moment_test(&cfg).unwrap();
    assert!(r.passed, "{r:?}");
    for m in &r.empirical_mean {
        assert!(m.abs() < 0.01, "{m}");
    }
}

#[test]
fn cold_chain_concentrates_at_the_optimum() {
    let cfg = GibbsConfig {
        diffusion_temperature: 1e6,
        ..GibbsConfig::reference()
    };
    let r = gibbs_moment_test(&cfg).unwrap();
    assert!(r.passed, "{r:?}");
    for (v, (m, y)) in r
        .empirical_variance
        .iter()
        .zip(r.empirical_mean.iter().zip(&cfg.targets))
    {
        assert!(*v < 1e-4);
        assert!((m - y / 1.5).abs() < 0.01);
    }
}

#[test]
fn gibbs_rejects_bad_burn_in() {
    let cfg = GibbsConfig {
        iterations: 10,
        burn_in: 10,
        ..GibbsConfig::reference()
    };
    assert!(gibbs_moment_test(&cfg).is_err());
}
