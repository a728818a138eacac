use mnl_lab::mnl::{
    best_assortment, choice_distribution, expected_revenue, instantaneous_regret, Assortment, MnlInstance, Outcome,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance_strategy(max_items: usize) -> impl Strategy<Value = (MnlInstance, Assortment)> {
    (1..=max_items)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.01f64..=1.0, n),
                prop::collection::vec(0.01f64..5.0, n),
                1..=n,
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(r, v, k, mask)| {
            let inst = MnlInstance::new(r, v, k).unwrap();
            let items: Vec<usize> = mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| i + 1)
                .take(k)
                .collect();
            (inst, Assortment::new(items).unwrap())
        })
}

/// Brute force over every bitmask of at most `K` items.
fn naive_best(inst: &MnlInstance) -> f64 {
    let n = inst.n_items();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > inst.capacity() {
            continue;
        }
        let (mut num, mut den) = (0.0, 1.0);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                num += inst.revenues()[i] * inst.preferences()[i];
                den += inst.preferences()[i];
            }
        }
        best = best.max(num / den);
    }
    best
}

proptest! {
    #[test]
    fn probabilities_sum_to_one((inst, s) in instance_strategy(12)) {
        let dist = choice_distribution(&inst, &s).unwrap();
        let total: f64 = dist.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(dist.probabilities().iter().all(|&p| p > 0.0));
        prop_assert_eq!(dist.outcomes()[0].0, Outcome::NoPurchase);
    }

    #[test]
    fn revenue_equals_probability_weighted_sum((inst, s) in instance_strategy(12)) {
        let dist = choice_distribution(&inst, &s).unwrap();
        let via_dist: f64 = dist
            .outcomes()
            .iter()
            .map(|(o, p)| match o {
                Outcome::Item(i) => inst.revenue(*i) * p,
                Outcome::NoPurchase => 0.0,
            })
            .sum();
        prop_assert!((via_dist - expected_revenue(&inst, &s).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn regret_is_nonnegative((inst, s) in instance_strategy(10)) {
        prop_assert!(instantaneous_regret(&inst, &s).unwrap() >= 0.0);
    }
}

#[test]
fn enumeration_matches_bitmask_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.random_range(1..=10);
        let k = rng.random_range(1..=n);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..=1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..4.0)).collect();
        let inst = MnlInstance::new(r, v, k).unwrap();
        let (set, value) = best_assortment(&inst).unwrap();
        assert!(set.len() <= k);
        assert!((value - naive_best(&inst)).abs() <= 1e-12);
        assert!((expected_revenue(&inst, &set).unwrap() - value).abs() <= 1e-12);
    }
}
