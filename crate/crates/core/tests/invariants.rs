use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use smootherlab::boosting_smoothers::{BoostConfig, BoostedModel};
use smootherlab::effective_params::{
    generalized_eff_params, hessian_proxy_eff_params, train_eff_params_classical,
};
use smootherlab::linear_smoothers::{LinearFit, PcrScaling};
use smootherlab::tree_smoothers::{RegressionTree, TreeEnsemble};
use smootherlab::{KnnSmoother, Matrix64, Smoother};

fn gaussian(seed: u64, rows: usize, cols: usize) -> Matrix64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix64::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn targets(x: &Matrix64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    (0..x.rows())
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x.row(i)[0].sin() + 0.5 * e
        })
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_and_forest_weights_are_averaging(
        seed in 0u64..1000, n in 5usize..60, leaves in 1usize..40, members in 1usize..6,
    ) {
        let x = gaussian(seed, n, 3);
        let y = targets(&x, seed);
        let x0 = gaussian(seed + 1, 15, 3);
        let tree = RegressionTree::fit(&x, &y, leaves, seed).unwrap();
        let forest = TreeEnsemble::fit(&x, &y, leaves, members, seed).unwrap();
        for m in [&tree as &dyn Smoother<f64>, &forest] {
            let w = m.weight_matrix(&x0).unwrap();
            let pred = m.predict(&x0).unwrap();
            for j in 0..x0.rows() {
                let row = w.row(j);
                prop_assert!(row.iter().all(|&v| v >= 0.0));
                prop_assert!(close(row.iter().sum::<f64>(), 1.0, 1e-12));
                let dot: f64 = row.iter().zip(&y).map(|(a, b)| a * b).sum();
                prop_assert!(close(dot, pred[j], 1e-10));
            }
        }
        prop_assert!(tree.n_leaves() <= leaves.min(n));
    }

    #[test]
    fn boosting_train_error_is_monotone(
        seed in 0u64..1000, n in 8usize..50, rounds in 1usize..20, lr in 0.05f64..1.0,
    ) {
        let x = gaussian(seed, n, 2);
        let y = targets(&x, seed);
        let cfg = BoostConfig { n_rounds: rounds, learning_rate: lr, leaf_budget: 4, seed, ..BoostConfig::default() };
        let m = BoostedModel::fit(&x, &y, &cfg).unwrap();
        let h = m.train_mse_history();
        prop_assert_eq!(h.len(), rounds);
        for w in h.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let x0 = gaussian(seed + 7, 10, 2);
        let w = m.weight_matrix(&x0).unwrap();
        let pred = m.predict(&x0).unwrap();
        for j in 0..x0.rows() {
            let dot: f64 = w.row(j).iter().zip(&y).map(|(a, b)| a * b).sum();
            prop_assert!(close(dot, pred[j], 1e-9));
        }
    }

    #[test]
    fn ols_hat_is_an_orthogonal_projection(seed in 0u64..1000, n in 12usize..40, p in 1usize..10) {
        let x = gaussian(seed, n, p);
        let y = targets(&x, seed);
        let hat = LinearFit::fit_ols(&x, &y).unwrap().hat_matrix();
        let hh = hat.matmul(&hat);
        prop_assert!(hh.sub(&hat).max_abs() < 1e-10);
        prop_assert!(hat.sub(&hat.transpose()).max_abs() < 1e-10);
        let c = train_eff_params_classical(&hat).unwrap();
        prop_assert!(close(c.p_var, p as f64, 1e-10));
    }

    #[test]
    fn minnorm_interpolates_with_identity_train_weights(seed in 0u64..1000, n in 5usize..30, extra in 0usize..40) {
        let p = n + extra;
        let phi = gaussian(seed, n, p);
        let y = targets(&phi, seed);
        let fit = LinearFit::fit_minnorm(&phi, &y).unwrap();
        for (a, b) in fit.fitted_values().iter().zip(&y) {
            prop_assert!(close(*a, *b, 1e-8));
        }
        let r = generalized_eff_params(&fit, &phi, "train").unwrap();
        prop_assert!(close(r.p_generalized, n as f64, 1e-8));
        let proxy = hessian_proxy_eff_params(&phi, 0.0).unwrap();
        prop_assert_eq!(proxy, n as f64);
    }

    #[test]
    fn pcr_train_effective_parameters_count_components(
        seed in 0u64..1000, n in 15usize..40, p in 5usize..30, frac in 0.0f64..1.0,
    ) {
        let phi = gaussian(seed, n, p);
        let y = targets(&phi, seed);
        let k = 1 + ((p.min(n - 1) - 1) as f64 * frac) as usize;
        let fit = LinearFit::fit_pcr(&phi, &y, k, PcrScaling::Standardize).unwrap();
        // Projection onto the intercept and k score columns.
        let r = generalized_eff_params(&fit, &phi, "train").unwrap();
        prop_assert!(close(r.p_generalized, (k + 1) as f64, 1e-8));
    }

    #[test]
    fn knn_effective_parameters(seed in 0u64..1000, n in 2usize..50, k_frac in 0.0f64..1.0) {
        let x = gaussian(seed, n, 2);
        let y = targets(&x, seed);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let knn = KnnSmoother::fit(&x, &y, k).unwrap();
        let r = generalized_eff_params(&knn, &gaussian(seed + 3, 20, 2), "test").unwrap();
        prop_assert!(close(r.p_generalized, n as f64 / k as f64, 1e-12));
        prop_assert!(close(r.effective_knn, k as f64, 1e-12));
    }
}
