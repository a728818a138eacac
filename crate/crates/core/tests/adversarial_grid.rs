use mnl_lab::adversarial::{
    all_elevated_sets, build_instance, epsilon_schedule, overlap_delta, planted_optimum_value, single_stage_gap,
    theorem_lower_bound, AdversarialSpec,
};
use mnl_lab::mnl::{best_assortment, expected_revenue, Assortment};
use proptest::prelude::*;

proptest! {
    #[test]
    fn gap_is_above_delta_eps_over_nine(eps in 0.001f64..=0.5, delta in 0.0f64..=1.0) {
        let g = single_stage_gap(eps, delta).unwrap();
        prop_assert!(g.exact_gap >= g.lower_bound_gap - 1e-15);
        prop_assert!(g.exact_gap >= 0.0);
    }

    #[test]
    fn schedule_stays_in_range(n in 1usize..5000, t in 1usize..10_000_000) {
        let eps = epsilon_schedule(n, t);
        prop_assert!(eps > 0.0 && eps <= 0.5);
    }

    #[test]
    fn bound_grows_with_horizon(n in 4usize..2000, t in 1usize..1_000_000, extra in 1usize..1000) {
        let k = n / 4;
        let a = theorem_lower_bound(n, t, k).unwrap().value;
        let b = theorem_lower_bound(n, t + extra, k).unwrap().value;
        prop_assert!(b >= a);
    }

    #[test]
    fn measured_gap_matches_closed_form(k in 1usize..8, eps in 0.01f64..=0.5, seed in any::<u64>()) {
        let n = 3 * k;
        let planted = Assortment::first(k);
        let spec = AdversarialSpec::new(n, k, eps, planted.clone()).unwrap();
        let inst = build_instance(&spec);
        // any size-K assortment, chosen by the seed
        let mut items: Vec<usize> = (1..=n).collect();
        let mut state = seed;
        for i in (1..items.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            items.swap(i, (state >> 33) as usize % (i + 1));
        }
        let offered = Assortment::new(items[..k].to_vec()).unwrap();
        let delta = overlap_delta(&planted, &offered, k).unwrap();
        let measured = planted_optimum_value(eps) - expected_revenue(&inst, &offered).unwrap();
        let g = single_stage_gap(eps, delta).unwrap();
        prop_assert!((measured - g.exact_gap).abs() <= 1e-12);
    }
}

#[test]
fn elevated_set_is_unique_optimum_for_small_n() {
    for n in [4, 8, 12, 20] {
        let k = n / 4;
        for eps in [0.01, 0.2, 0.5] {
            for set in all_elevated_sets(n, k).step_by(7) {
                let spec = AdversarialSpec::new(n, k, eps, set.clone()).unwrap();
                let (best, value) = best_assortment(&build_instance(&spec)).unwrap();
                assert_eq!(best, set);
                assert!((value - planted_optimum_value(eps)).abs() <= 1e-12);
            }
        }
    }
}
