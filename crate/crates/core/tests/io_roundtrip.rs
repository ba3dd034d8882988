mod common;

use std::sync::Arc;

use causal_refine::{io, BeliefVector, BinaryDataset, Error, LabelSchema, Tier};
use proptest::prelude::*;

fn dataset_strategy() -> impl Strategy<Value = BinaryDataset> {
    (1usize..8, 1usize..30).prop_flat_map(|(cols, rows)| {
        (
            proptest::collection::vec(0usize..3, cols),
            proptest::collection::vec(proptest::collection::vec(0u8..2, cols), rows),
        )
            .prop_map(|(tiers, rows)| {
                let schema = LabelSchema::from_pairs(
                    tiers
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| (format!("label_{i}"), Tier::ALL[t])),
                )
                .unwrap();
                BinaryDataset::from_rows(Arc::new(schema), &rows).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dataset_save_load_round_trip(data in dataset_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        let tiers = dir.path().join("t.json");
        io::save_dataset(&csv, &data).unwrap();
        io::save_tiers(&tiers, data.schema()).unwrap();
        let back = io::load_dataset(&csv, &tiers).unwrap();
        prop_assert_eq!(back.schema().labels(), data.schema().labels());
        prop_assert_eq!(back.rows().collect::<Vec<_>>(), data.rows().collect::<Vec<_>>());
    }

    #[test]
    fn beliefs_round_trip_bit_exactly(values in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 4), 1..10)) {
        let schema = common::schema_of(&[Tier::Cause, Tier::Reason, Tier::Symptom, Tier::Symptom]);
        let beliefs: Vec<BeliefVector> = values.iter().map(|v| BeliefVector::new(schema.clone(), v.clone()).unwrap()).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        io::save_beliefs(&path, &schema, &beliefs).unwrap();
        let back = io::load_beliefs(&path, schema).unwrap();
        for (a, b) in back.iter().zip(&beliefs) {
            prop_assert_eq!(a.values(), b.values());
        }
    }
}

#[test]
fn malformed_files_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let tiers = dir.path().join("t.json");
    std::fs::write(&tiers, r#"{"a": "C", "b": "S"}"#).unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let cases = [
        ("empty.csv", "", "EmptyFile"),
        ("cell.csv", "a,b\n1,2\n", "BadCell"),
        ("width.csv", "a,b\n1,0,1\n", "RowWidth"),
        ("unknown.csv", "a,c\n1,0\n", "MissingTier"),
        ("dup.csv", "a,a\n1,0\n", "DuplicateLabel"),
    ];
    for (file, body, expected) in cases {
        let err = io::load_dataset(&write(file, body), &tiers).unwrap_err();
        assert_eq!(err.name(), expected, "{file}: {err}");
    }
    let bad_tier = write("bad_tier.json", r#"{"a": "X", "b": "S"}"#);
    let ok = write("ok.csv", "a,b\n1,0\n");
    assert!(matches!(
        io::load_dataset(&ok, &bad_tier),
        Err(Error::InvalidTier { .. }) | Err(Error::Json(_))
    ));
}
