mod common;

use std::sync::Arc;

use common::{mse, random_dataset};
use nalgebra::{DMatrix, DVector};
use polyfreg::aggregation::{
    aggregate_with_predictions, build_g_tilde, build_gram_tilde, predict_aggregated_many, prediction_matrix,
    solve_aggregation,
};
use polyfreg::experiments::{toy_sample, ToyConfig};
use polyfreg::mp_solver::predict_many;
use polyfreg::{aggregate, fit, gram, Dataset, LambdaVector, PolyModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn family(data: &Arc<Dataset>, lambdas: &[f64]) -> Vec<PolyModel> {
    lambdas
        .iter()
        .map(|&l| fit(data.clone(), &LambdaVector::new(vec![l, l * 0.5, l * 2.0]).unwrap()).unwrap())
        .collect()
}

fn noisy_toy(seed: u64, n: usize, sigma: f64) -> Arc<Dataset> {
    let cfg = ToyConfig {
        seed,
        n_max: n,
        noise_sigma: sigma,
        grid_nodes: 64,
        ..ToyConfig::default()
    };
    Arc::new(toy_sample(&cfg, n).unwrap())
}

#[test]
fn weights_match_least_squares_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let r = rng.random_range(1..5);
        let n = rng.random_range(r + 2..20);
        let p = DMatrix::from_fn(r, n, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sol = solve_aggregation(&p, &y).unwrap();
        // min_c ‖Pᵀ c − Y‖ via SVD.
        let oracle = p
            .transpose()
            .svd(true, true)
            .solve(&DVector::from_vec(y.clone()), 1e-14)
            .unwrap();
        for (a, b) in sol.coefficients.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        assert_eq!(sol.ridge_used, 0.0);
    }
}

#[test]
fn single_model_weight_is_projection() {
    let p = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, -1.0, 0.5]);
    let y = [2.0, 3.0, -1.0, 1.0];
    let sol = solve_aggregation(&p, &y).unwrap();
    let expected = (2.0 + 6.0 + 1.0 + 0.5) / (1.0 + 4.0 + 1.0 + 0.25);
    assert!((sol.coefficients[0] - expected).abs() < 1e-14);
}

#[test]
fn training_risk_dominance() {
    for seed in 0..20u64 {
        let n = [10, 20, 30][(seed % 3) as usize];
        let data = noisy_toy(seed, n, if seed % 2 == 0 { 0.0 } else { 0.1 });
        let models = family(&data, &[1e-1, 1e-3, 1e-5, 1e-7]);
        let risks: Vec<f64> = models
            .iter()
            .map(|m| mse(&predict_many(m, data.samples()).unwrap(), data.responses()))
            .collect();
        let best = risks.iter().cloned().fold(f64::INFINITY, f64::min);
        let agg = aggregate(models, &data).unwrap();
        let risk = mse(
            &predict_aggregated_many(&agg, data.samples()).unwrap(),
            data.responses(),
        );
        assert!(risk <= best + 1e-8 * (1.0 + best), "seed {seed}: {risk} > {best}");
    }
}

#[test]
fn combined_representer_predicts_like_the_aggregate() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let data = random_dataset(&mut rng, 7, 64);
    let agg = aggregate(family(&data, &[1.0, 1e-2, 1e-4]), &data).unwrap();
    let rep = agg.combined_representer().unwrap();
    let g = gram(&data);
    let direct = predict_aggregated_many(&agg, data.samples()).unwrap();
    for (a, b) in rep.fitted_values(&g).iter().zip(&direct) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
    }
}

#[test]
fn duplicate_models_trigger_ridge() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let data = random_dataset(&mut rng, 6, 64);
    let models = family(&data, &[1e-2, 1e-2]);
    let p = prediction_matrix(&models, &data).unwrap();
    let agg = aggregate_with_predictions(models, &p, data.responses()).unwrap();
    assert!(agg.ridge_used() > 0.0);
    let combined: f64 = agg.coefficients().iter().sum();
    let single = solve_aggregation(&p.rows(0, 1).into_owned(), data.responses()).unwrap();
    assert!((combined - single.coefficients[0]).abs() < 1e-6);
}

#[test]
fn vanishing_predictions_are_rejected() {
    let p = DMatrix::zeros(2, 5);
    assert!(solve_aggregation(&p, &[1.0; 5]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_tilde_is_symmetric_psd(seed in any::<u64>(), r in 1usize..6, n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DMatrix::from_fn(r, n, |_, _| rng.random_range(-3.0..3.0));
        let g = build_gram_tilde(&p).unwrap();
        prop_assert_eq!(g.clone(), g.transpose());
        let eig = g.clone().symmetric_eigen();
        let floor = -1e-12 * g.trace().abs().max(1.0);
        prop_assert!(eig.eigenvalues.iter().all(|&v| v >= floor));
    }

    #[test]
    fn weights_scale_with_responses(seed in any::<u64>(), a in -5.0f64..5.0) {
        prop_assume!(a.abs() > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DMatrix::from_fn(3, 10, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ya: Vec<f64> = y.iter().map(|v| a * v).collect();
        let c = solve_aggregation(&p, &y).unwrap().coefficients;
        let ca = solve_aggregation(&p, &ya).unwrap().coefficients;
        for (x, z) in c.iter().zip(&ca) {
            prop_assert!((a * x - z).abs() < 1e-8 * (1.0 + z.abs()));
        }
        let g = build_g_tilde(&p, &y).unwrap();
        let ga = build_g_tilde(&p, &ya).unwrap();
        for (x, z) in g.iter().zip(ga.iter()) {
            prop_assert!((a * x - z).abs() < 1e-12 * (1.0 + z.abs()));
        }
    }

    /// Aggregation fits the responses at least as well as any base model.
    #[test]
    fn dominance_on_random_predictions(seed in any::<u64>(), r in 1usize..6, n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DMatrix::from_fn(r, n, |_, _| rng.random_range(-2.0..2.0));
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let c = solve_aggregation(&p, &y).unwrap().coefficients;
        let combined: Vec<f64> = (0..n).map(|i| (0..r).map(|k| c[k] * p[(k, i)]).sum()).collect();
        let risk = mse(&combined, &y);
        for k in 0..r {
            let row: Vec<f64> = p.row(k).iter().cloned().collect();
            prop_assert!(risk <= mse(&row, &y) + 1e-8 * (1.0 + mse(&row, &y)));
        }
    }
}
