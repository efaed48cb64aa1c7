//! Metric and grid properties of the measures module.

use nlmc::measures::{
    meet_measure, random_distribution, simplex_grid, tv_distance, Distribution, StateSpace,
};
use proptest::prelude::*;

fn distribution_strategy(m: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, m).prop_filter_map("degenerate weights", |raw| {
        let sum: f64 = raw.iter().sum();
        if sum < 1e-6 {
            return None;
        }
        Distribution::new(raw.iter().map(|w| w / sum).collect()).ok()
    })
}

proptest! {
    #[test]
    fn tv_is_a_bounded_metric(
        a in distribution_strategy(4),
        b in distribution_strategy(4),
        c in distribution_strategy(4),
    ) {
        let dab = tv_distance(&a, &b).unwrap();
        let dba = tv_distance(&b, &a).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert!(dab >= 0.0);
        prop_assert!(dab <= 2.0 + 1e-12);
        let dac = tv_distance(&a, &c).unwrap();
        let dcb = tv_distance(&c, &b).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-12);
        prop_assert!(tv_distance(&a, &a).unwrap() == 0.0);
    }

    #[test]
    fn meet_mass_complements_tv(
        a in distribution_strategy(5),
        b in distribution_strategy(5),
    ) {
        let eta = meet_measure(&a, &b).unwrap();
        let mass: f64 = eta.iter().sum();
        let tv = tv_distance(&a, &b).unwrap();
        prop_assert!((tv - 2.0 * (1.0 - mass)).abs() <= 1e-12);
        for (i, e) in eta.iter().enumerate() {
            prop_assert!(*e <= a.weight(i) && *e <= b.weight(i));
            prop_assert!(*e >= 0.0);
        }
    }
}

#[test]
fn grid_points_are_distributions_with_vertices() {
    for m in [2usize, 3, 4] {
        let space = StateSpace::new(m).unwrap();
        for denom in [1u32, 2, 5, 9] {
            let grid = simplex_grid(space, denom).unwrap();
            for p in &grid {
                let sum: f64 = p.weights().iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                assert!(p.weights().iter().all(|w| *w >= 0.0));
            }
            for k in 0..m {
                let v = Distribution::vertex(space, k);
                assert!(grid.iter().any(|p| p.weights() == v.weights()));
            }
        }
    }
}

#[test]
fn random_distributions_are_valid() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let space = StateSpace::new(6).unwrap();
    for _ in 0..1000 {
        let d = random_distribution(space, &mut rng);
        let sum: f64 = d.weights().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(d.weights().iter().all(|w| *w >= 0.0));
    }
}
