//! Dominance, exactness, and bracket-monotonicity properties of the
//! contraction coefficients.

use nlmc::builtin::{self, BuiltinExample};
use nlmc::contraction::{
    alpha_one_step, coefficients_k_step, lambda_one_step, search_coefficients, SearchConfig,
};
use nlmc::kernels::{evaluate, two_step};
use nlmc::measures::{random_distribution, tv_distance, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space4() -> StateSpace {
    StateSpace::new(4).unwrap()
}

fn quick_config() -> SearchConfig {
    SearchConfig { denominator: 10, ..SearchConfig::default() }
}

#[test]
fn one_step_alpha_dominates_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for (example, gamma) in [(BuiltinExample::Example1, 0.2), (BuiltinExample::Example2, 0.4)] {
        let kernel = builtin::kernel(example, gamma).unwrap();
        let alpha = alpha_one_step(&kernel).unwrap().value.lower;
        for _ in 0..10_000 {
            let mu = random_distribution(space4(), &mut rng);
            let nu = random_distribution(space4(), &mut rng);
            let (x, y) = (rng.random_range(0..4), rng.random_range(0..4));
            let pm = evaluate(&kernel, &mu).unwrap();
            let pn = evaluate(&kernel, &nu).unwrap();
            let tv: f64 = pm.row(x).iter().zip(pn.row(y)).map(|(a, b)| (a - b).abs()).sum();
            assert!(tv <= 2.0 * (1.0 - alpha) + 1e-9);
        }
    }
}

#[test]
fn two_step_coefficients_dominate_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for (example, gamma) in [(BuiltinExample::Example1, 0.2), (BuiltinExample::Example2, 0.4)] {
        let kernel = builtin::kernel(example, gamma).unwrap();
        let report = coefficients_k_step(&kernel, 2, &quick_config()).unwrap();
        let alpha_lower = report.alpha.value.lower;
        let lambda_upper = report.lambda.value.upper;
        for _ in 0..10_000 {
            let mu = random_distribution(space4(), &mut rng);
            let nu = random_distribution(space4(), &mut rng);
            let qm = two_step(&kernel, &mu).unwrap();
            let qn = two_step(&kernel, &nu).unwrap();
            let (x, y) = (rng.random_range(0..4), rng.random_range(0..4));
            let tv_xy: f64 = qm.row(x).iter().zip(qn.row(y)).map(|(a, b)| (a - b).abs()).sum();
            assert!(tv_xy <= 2.0 * (1.0 - alpha_lower) + 1e-9);

            let tvd = tv_distance(&mu, &nu).unwrap();
            if tvd >= 1e-6 {
                let tv_x: f64 =
                    qm.row(x).iter().zip(qn.row(x)).map(|(a, b)| (a - b).abs()).sum();
                assert!(
                    tv_x <= lambda_upper * tvd + 1e-9,
                    "{example}: ratio {} exceeds lambda upper {lambda_upper}",
                    tv_x / tvd
                );
            }
        }
    }
}

#[test]
fn sampling_never_beats_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for (example, gamma) in [(BuiltinExample::Example1, 0.1), (BuiltinExample::Example2, 0.25)] {
        let kernel = builtin::kernel(example, gamma).unwrap();
        let exact_sup = 2.0 * (1.0 - alpha_one_step(&kernel).unwrap().value.lower);
        let exact_lambda = lambda_one_step(&kernel).unwrap().value.lower;
        let mut sampled_sup = 0.0f64;
        let mut sampled_lambda = 0.0f64;
        for _ in 0..20_000 {
            let mu = random_distribution(space4(), &mut rng);
            let nu = random_distribution(space4(), &mut rng);
            let pm = evaluate(&kernel, &mu).unwrap();
            let pn = evaluate(&kernel, &nu).unwrap();
            let tvd = tv_distance(&mu, &nu).unwrap();
            for x in 0..4 {
                for y in 0..4 {
                    let tv: f64 =
                        pm.row(x).iter().zip(pn.row(y)).map(|(a, b)| (a - b).abs()).sum();
                    sampled_sup = sampled_sup.max(tv);
                }
                if tvd > 1e-9 {
                    let tv: f64 =
                        pm.row(x).iter().zip(pn.row(x)).map(|(a, b)| (a - b).abs()).sum();
                    sampled_lambda = sampled_lambda.max(tv / tvd);
                }
            }
        }
        assert!(sampled_sup <= exact_sup + 1e-12);
        assert!(sampled_lambda <= exact_lambda + 1e-12);
    }
}

#[test]
fn brackets_are_monotone_under_grid_refinement() {
    for (example, gamma) in [(BuiltinExample::Example1, 0.1), (BuiltinExample::Example2, 0.4)] {
        let kernel = builtin::kernel(example, gamma).unwrap();
        let coarse = coefficients_k_step(
            &kernel,
            2,
            &SearchConfig { denominator: 6, ..SearchConfig::default() },
        )
        .unwrap();
        let fine = coefficients_k_step(
            &kernel,
            2,
            &SearchConfig { denominator: 12, ..SearchConfig::default() },
        )
        .unwrap();
        assert!(fine.alpha.value.upper <= coarse.alpha.value.upper + 1e-12);
        assert!(fine.alpha.value.lower >= coarse.alpha.value.lower - 1e-12);
        assert!(fine.lambda.value.lower >= coarse.lambda.value.lower - 1e-12);
        assert!(fine.lambda.value.upper <= coarse.lambda.value.upper + 1e-12);
    }
}

#[test]
fn forced_search_agrees_with_exact_one_step() {
    for (example, gamma) in [(BuiltinExample::Example1, 0.2), (BuiltinExample::Example2, 0.4)] {
        let kernel = builtin::kernel(example, gamma).unwrap();
        let exact = coefficients_k_step(&kernel, 1, &quick_config()).unwrap();
        let searched = search_coefficients(&kernel, 1, &quick_config()).unwrap();
        assert!(searched.alpha.value.lower - 1e-12 <= exact.alpha.value.lower);
        assert!(exact.alpha.value.lower <= searched.alpha.value.upper + 1e-12);
        assert!(searched.lambda.value.lower - 1e-12 <= exact.lambda.value.lower);
        assert!(exact.lambda.value.lower <= searched.lambda.value.upper + 1e-12);
    }
}
