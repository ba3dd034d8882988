mod common;

use std::sync::Arc;

use causal_refine::cpt::fit_cpts;
use causal_refine::{BinaryDataset, CausalGraph, Tier};
use proptest::prelude::*;

/// C0 -> R2 <- C1, R2 -> S3
fn graph() -> CausalGraph {
    let schema = common::schema_of(&[Tier::Cause, Tier::Cause, Tier::Reason, Tier::Symptom]);
    CausalGraph::from_arcs(schema, &[(0, 2), (1, 2), (2, 3)]).unwrap()
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<u8>>> {
    proptest::collection::vec(proptest::collection::vec(0u8..2, 4), 1..60)
}

fn data(rows: &[Vec<u8>]) -> BinaryDataset {
    BinaryDataset::from_rows(Arc::clone(graph().schema()), rows).unwrap()
}

proptest! {
    #[test]
    fn adding_a_positive_row_never_lowers_its_conditional(rows in rows_strategy(), extra in proptest::collection::vec(0u8..2, 4), s in 0.0f64..3.0) {
        let g = graph();
        let before = fit_cpts(&data(&rows), &g, s).unwrap();
        let mut row = extra;
        row[2] = 1;
        let mut more = rows.clone();
        more.push(row.clone());
        let after = fit_cpts(&data(&more), &g, s).unwrap();
        let cfg = before.node(2).config_of(&row);
        prop_assert!(after.node(2).p_one[cfg] >= before.node(2).p_one[cfg]);
    }

    #[test]
    fn probabilities_and_complements_are_exact(rows in rows_strategy(), s in 0.0f64..3.0) {
        let cpts = fit_cpts(&data(&rows), &graph(), s).unwrap();
        for node in cpts.nodes() {
            for &p in &node.p_one {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert_eq!(p + (1.0 - p), 1.0);
            }
        }
    }

    #[test]
    fn pairwise_tables_are_bayes_consistent(rows in rows_strategy(), s in 0.01f64..3.0) {
        let cpts = fit_cpts(&data(&rows), &graph(), s).unwrap();
        for e in cpts.edges() {
            let (pf, pt) = (e.from_marginal(), e.to_marginal());
            for v in 0..2 {
                let pv = if v == 1 { pt } else { 1.0 - pt };
                let fv = if v == 1 { e.forward[1] * pf + e.forward[0] * (1.0 - pf) } else { (1.0 - e.forward[1]) * pf + (1.0 - e.forward[0]) * (1.0 - pf) };
                prop_assert!((pv - fv).abs() < 1e-12);
                let joint_from1 = if v == 1 { e.forward[1] * pf } else { (1.0 - e.forward[1]) * pf };
                prop_assert!((joint_from1 - e.backward[v] * pv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip(rows in rows_strategy(), s in 0.0f64..3.0) {
        let g = graph();
        let cpts = fit_cpts(&data(&rows), &g, s).unwrap();
        let back = causal_refine::cpt::CptSet::from_json(&cpts.to_json(), g.schema().clone()).unwrap();
        prop_assert_eq!(back.nodes(), cpts.nodes());
        prop_assert_eq!(back.edges(), cpts.edges());
    }
}

#[test]
fn heavy_smoothing_flattens_every_table() {
    let mut rng = common::rng(5);
    let g = graph();
    let rows: Vec<Vec<u8>> = (0..200)
        .map(|_| {
            (0..4)
                .map(|_| rand::Rng::gen_bool(&mut rng, 0.8) as u8)
                .collect()
        })
        .collect();
    let cpts = fit_cpts(&data(&rows), &g, 1e12).unwrap();
    for node in cpts.nodes() {
        assert!(node.p_one.iter().all(|p| (p - 0.5).abs() < 1e-8));
    }
}

#[test]
fn refitting_on_samples_recovers_the_tables() {
    let mut rng = common::rng(9);
    let g = graph();
    let rows: Vec<Vec<u8>> = (0..300)
        .map(|_| {
            (0..4)
                .map(|_| rand::Rng::gen_bool(&mut rng, 0.4) as u8)
                .collect()
        })
        .collect();
    let fitted = fit_cpts(&data(&rows), &g, 1.0).unwrap();
    let order = g.topological_order().unwrap();
    let sample = fitted.sample(&order, 50_000, &mut rng).unwrap();
    let refit = fit_cpts(&sample, &g, 1.0).unwrap();
    for (a, b) in fitted.nodes().iter().zip(refit.nodes()) {
        for (p, q) in a.p_one.iter().zip(&b.p_one) {
            assert!((p - q).abs() <= 0.02, "{p} vs {q}");
        }
    }
}
