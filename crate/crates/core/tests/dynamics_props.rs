//! Trajectory, invariant-measure, and bound-audit properties.

use nlmc::builtin::{self, BuiltinExample};
use nlmc::contraction::{coefficients_k_step, lambda_one_step, SearchConfig};
use nlmc::dynamics::{invariant, iterate, lemma_bound_sequence, vertex_and_uniform_starts};
use nlmc::kernels::step;
use nlmc::measures::{random_distribution, tv_distance, StateSpace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space4() -> StateSpace {
    StateSpace::new(4).unwrap()
}

fn covered_kernels() -> Vec<(String, nlmc::AffineKernel)> {
    vec![
        ("example1 gamma=0.2".into(), builtin::kernel(BuiltinExample::Example1, 0.2).unwrap()),
        ("example2 gamma=0.4".into(), builtin::kernel(BuiltinExample::Example2, 0.4).unwrap()),
    ]
}

#[test]
fn invariant_residual_stays_within_ten_tolerances() {
    for (name, kernel) in covered_kernels() {
        for tol in [1e-9, 1e-11, 1e-13] {
            let result =
                invariant(&kernel, &vertex_and_uniform_starts(space4()), tol, 200_000).unwrap();
            assert!(
                result.residual <= 10.0 * tol,
                "{name}: residual {} at tol {tol}",
                result.residual
            );
        }
    }
}

#[test]
fn two_step_contraction_inequality_holds_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let config = SearchConfig { denominator: 10, ..SearchConfig::default() };
    for (name, kernel) in covered_kernels() {
        let report = coefficients_k_step(&kernel, 2, &config).unwrap();
        let rate = 1.0 - report.alpha.value.lower + report.lambda.value.upper;
        for _ in 0..2_000 {
            let mu = random_distribution(space4(), &mut rng);
            let nu = random_distribution(space4(), &mut rng);
            let mu2 = step(&kernel, &step(&kernel, &mu).unwrap()).unwrap();
            let nu2 = step(&kernel, &step(&kernel, &nu).unwrap()).unwrap();
            let lhs = tv_distance(&mu2, &nu2).unwrap();
            let rhs = rate * tv_distance(&mu, &nu).unwrap() + 1e-9;
            assert!(lhs <= rhs, "{name}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn odd_steps_inflate_by_at_most_one_plus_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    for (name, kernel) in covered_kernels() {
        let lambda1 = lambda_one_step(&kernel).unwrap().value.lower;
        for _ in 0..200 {
            let mu0 = random_distribution(space4(), &mut rng);
            let nu0 = random_distribution(space4(), &mut rng);
            let a = iterate(&kernel, &mu0, 21).unwrap();
            let b = iterate(&kernel, &nu0, 21).unwrap();
            for m in 0..10 {
                let even = tv_distance(&a.laws[2 * m], &b.laws[2 * m]).unwrap();
                let odd = tv_distance(&a.laws[2 * m + 1], &b.laws[2 * m + 1]).unwrap();
                assert!(
                    odd <= (1.0 + lambda1) * even + 1e-12,
                    "{name}: step {} inflation {} vs {}",
                    2 * m + 1,
                    odd,
                    (1.0 + lambda1) * even
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn lemma_recursion_never_exceeds_closed_form(
        a0 in 1e-6f64..=1.0,
        lambda in 1e-6f64..=1.0,
    ) {
        let mut a = a0;
        for n in 0..=10_000usize {
            let cap = lemma_bound_sequence(a0, lambda, n).unwrap();
            prop_assert!(a <= cap + 1e-15, "n = {n}: {a} > {cap}");
            a *= 1.0 - lambda * a;
        }
    }
}
