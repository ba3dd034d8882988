mod common;

use causal_refine::ci::{chi_squared_sf, g_squared_test, CiConfig, CiTest, ContingencyTest};
use proptest::prelude::*;

proptest! {
    #[test]
    fn g2_matches_entropy_oracle(seed in any::<u64>(), n in 1usize..=64, m in 2usize..=4) {
        let mut rng = common::rng(seed);
        let data = common::random_dataset(&mut rng, n, m);
        let z: Vec<usize> = (2..m).collect();
        let r = g_squared_test(&data, 0, 1, &z, 0.05).unwrap();
        let (g, strata) = common::brute_force_g2(&data, 0, 1, &z);
        prop_assert!((r.statistic - g).abs() <= 1e-9, "{} vs {}", r.statistic, g);
        prop_assert_eq!(r.dof, strata);
    }

    #[test]
    fn test_is_symmetric_in_x_and_y(seed in any::<u64>(), n in 1usize..=200) {
        let mut rng = common::rng(seed);
        let data = common::random_dataset(&mut rng, n, 4);
        let t = ContingencyTest::new(&data, CiConfig::default()).unwrap();
        let a = t.test(0, 1, &[2, 3]).unwrap();
        let b = t.test(1, 0, &[2, 3]).unwrap();
        prop_assert_eq!(a, b);
        let c = t.test(0, 1, &[3, 2]).unwrap();
        prop_assert!((a.statistic - c.statistic).abs() <= 1e-9);
        prop_assert_eq!(a.independent, c.independent);
    }

    #[test]
    fn test_is_invariant_to_row_order(seed in any::<u64>(), n in 1usize..=200) {
        let mut rng = common::rng(seed);
        let data = common::random_dataset(&mut rng, n, 3);
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let shuffled = data.select_rows(&order).unwrap();
        let a = g_squared_test(&data, 0, 1, &[2], 0.05).unwrap();
        let b = g_squared_test(&shuffled, 0, 1, &[2], 0.05).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() <= 1e-9);
        prop_assert_eq!(a.dof, b.dof);
        prop_assert_eq!(a.independent, b.independent);
    }

    #[test]
    fn decision_follows_p_value_unless_low_power(seed in any::<u64>(), n in 1usize..=300) {
        let mut rng = common::rng(seed);
        let data = common::random_dataset(&mut rng, n, 3);
        let r = g_squared_test(&data, 0, 1, &[2], 0.05).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        prop_assert!(r.statistic >= 0.0);
        if r.low_power {
            prop_assert!(r.independent);
            prop_assert!((n as f64) < 10.0 * r.dof as f64);
        } else {
            prop_assert_eq!(r.independent, r.p_value > 0.05);
            prop_assert!((r.p_value - chi_squared_sf(r.statistic, r.dof)).abs() < 1e-12);
        }
    }
}

#[test]
fn fair_coins_are_rarely_dependent() {
    let mut dependent = 0;
    let runs = 400;
    for seed in 0..runs {
        let mut rng = common::rng(seed);
        let data = common::random_dataset(&mut rng, 500, 2);
        if !g_squared_test(&data, 0, 1, &[], 0.05).unwrap().independent {
            dependent += 1;
        }
    }
    // 5% nominal; binomial sd is about 1.1%
    let rate = dependent as f64 / runs as f64;
    assert!(rate < 0.09, "false dependence rate {rate}");
}
