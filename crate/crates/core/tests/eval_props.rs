use std::collections::BTreeSet;

use causal_refine::eval::{evaluate_refinement, f_measure, run_benchmark, ExperimentConfig};
use causal_refine::refine::RefineConfig;
use causal_refine::synth::{generate, SyntheticSpec};
use proptest::prelude::*;

proptest! {
    #[test]
    fn f_measure_is_symmetric_and_one_only_on_equal_sets(a in proptest::collection::vec(0usize..12, 0..8), b in proptest::collection::vec(0usize..12, 0..8)) {
        let f = f_measure(&a, &b);
        prop_assert_eq!(f, f_measure(&b, &a));
        prop_assert!((0.0..=1.0).contains(&f));
        let (sa, sb): (BTreeSet<_>, BTreeSet<_>) = (a.iter().collect(), b.iter().collect());
        prop_assert_eq!(f == 1.0, sa == sb);
    }
}

fn small_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n_test: 60,
        seed,
        ..SyntheticSpec::default()
    }
}

#[test]
fn report_means_match_per_instance_scores() {
    let data = generate(&small_spec(2)).unwrap();
    let r = evaluate_refinement(
        &data.truth_graph,
        &data.truth_cpts,
        &data.base_beliefs,
        &data.test,
        &RefineConfig::default(),
        0.1,
    )
    .unwrap();
    assert_eq!(r.mean_f1.len(), 21);
    assert_eq!(r.baseline_f1, r.mean_f1[0]);
    for (t, row) in r.per_instance_f1.iter().enumerate() {
        assert_eq!(row.len(), 60);
        assert!(row.iter().all(|f| (0.0..=1.0).contains(f)));
        let m = row.iter().sum::<f64>() / row.len() as f64;
        assert!((m - r.mean_f1[t]).abs() < 1e-12);
    }
}

#[test]
fn noiseless_beliefs_score_perfectly_at_baseline() {
    let noisy = generate(&small_spec(3)).unwrap();
    let clean = generate(&SyntheticSpec {
        flip_rate: 0.0,
        jitter: 0.0,
        ..small_spec(3)
    })
    .unwrap();
    let score = |d: &causal_refine::synth::SyntheticData| {
        evaluate_refinement(
            &d.truth_graph,
            &d.truth_cpts,
            &d.base_beliefs,
            &d.test,
            &RefineConfig::default(),
            0.1,
        )
        .unwrap()
    };
    let (c, n) = (score(&clean), score(&noisy));
    assert_eq!(c.baseline_f1, 1.0);
    assert!(c.baseline_f1 >= n.baseline_f1);
}

#[test]
fn zero_rate_gives_flat_curves_and_csv_shape() {
    let report = run_benchmark(
        &SyntheticSpec {
            n_test: 40,
            ..SyntheticSpec::default()
        },
        &[1, 2],
        &[0.0, 0.01],
        &ExperimentConfig::default(),
    )
    .unwrap();
    let flat = &report.families[0];
    assert!(flat.mean_curve.iter().all(|&v| v == flat.mean_curve[0]));
    let csv = report.curves_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,seed,iteration,mean_f1");
    assert_eq!(lines.len(), 1 + 2 * 2 * 21);
    assert_eq!(
        lines.iter().filter(|l| l.starts_with("0.01,2,")).count(),
        21
    );
}
