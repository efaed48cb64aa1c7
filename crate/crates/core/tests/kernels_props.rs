//! Stochasticity, composition, and affinity properties of kernel evaluation.

use nlmc::builtin::{self, BuiltinExample};
use nlmc::kernels::{evaluate, k_step, step, two_step};
use nlmc::measures::{random_distribution, simplex_grid, tv_distance, Distribution, StateSpace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn admissible_kernels() -> Vec<(String, nlmc::AffineKernel)> {
    let mut kernels = Vec::new();
    for gamma in [0.1, 0.25, 0.4] {
        for example in [BuiltinExample::Example1, BuiltinExample::Example2] {
            let (low, high) = example.gamma_range();
            if gamma > low && gamma < high {
                kernels.push((
                    format!("{example} gamma={gamma}"),
                    builtin::kernel(example, gamma).unwrap(),
                ));
            }
        }
    }
    kernels
}

#[test]
fn rows_are_distributions_on_the_grid() {
    let space = StateSpace::new(4).unwrap();
    let grid = simplex_grid(space, 7).unwrap();
    for (name, kernel) in admissible_kernels() {
        for mu in &grid {
            for matrix in [
                evaluate(&kernel, mu).unwrap(),
                two_step(&kernel, mu).unwrap(),
                k_step(&kernel, mu, 3).unwrap(),
            ] {
                for x in 0..4 {
                    let row = matrix.row(x);
                    let sum: f64 = row.iter().sum();
                    assert!((sum - 1.0).abs() <= 1e-12, "{name}: row {x} sums to {sum}");
                    assert!(row.iter().all(|w| *w >= 0.0), "{name}: negative entry in row {x}");
                }
            }
        }
    }
}

#[test]
fn law_propagation_agrees_with_two_step_kernel() {
    let space = StateSpace::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (name, kernel) in admissible_kernels() {
        for _ in 0..200 {
            let mu = random_distribution(space, &mut rng);
            let twice = step(&kernel, &step(&kernel, &mu).unwrap()).unwrap();
            let through_q = two_step(&kernel, &mu).unwrap().propagate(&mu).unwrap();
            let gap = tv_distance(&twice, &through_q).unwrap();
            assert!(gap <= 1e-13, "{name}: propagation gap {gap}");
        }
    }
}

#[test]
fn k_step_composes_additively() {
    let space = StateSpace::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for (name, kernel) in admissible_kernels() {
        for &(a, b) in &[(1u32, 1u32), (1, 2), (2, 1), (2, 3)] {
            let mu = random_distribution(space, &mut rng);
            let whole = k_step(&kernel, &mu, a + b).unwrap();
            let first = k_step(&kernel, &mu, a).unwrap();
            // law after `a` steps
            let mut law = mu.clone();
            for _ in 0..a {
                law = step(&kernel, &law).unwrap();
            }
            let second = k_step(&kernel, &law, b).unwrap();
            for x in 0..4 {
                for j in 0..4 {
                    let composed: f64 =
                        (0..4).map(|t| first.entry(x, t) * second.entry(t, j)).sum();
                    let gap = (whole.entry(x, j) - composed).abs();
                    assert!(gap <= 1e-12, "{name}: ({a}+{b})-step entry ({x},{j}) gap {gap}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn evaluation_is_affine_in_the_law(
        t in 0.0f64..1.0,
        raw_a in prop::collection::vec(0.01f64..1.0, 4),
        raw_b in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let normalize = |raw: &[f64]| {
            let sum: f64 = raw.iter().sum();
            Distribution::new(raw.iter().map(|w| w / sum).collect()).unwrap()
        };
        let mu = normalize(&raw_a);
        let nu = normalize(&raw_b);
        let mixed = Distribution::new(
            mu.weights()
                .iter()
                .zip(nu.weights())
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect(),
        )
        .unwrap();
        for (_, kernel) in admissible_kernels() {
            let at_mixed = evaluate(&kernel, &mixed).unwrap();
            let at_mu = evaluate(&kernel, &mu).unwrap();
            let at_nu = evaluate(&kernel, &nu).unwrap();
            for x in 0..4 {
                for j in 0..4 {
                    let blend = t * at_mu.entry(x, j) + (1.0 - t) * at_nu.entry(x, j);
                    prop_assert!((at_mixed.entry(x, j) - blend).abs() <= 1e-14);
                }
            }
        }
    }
}
