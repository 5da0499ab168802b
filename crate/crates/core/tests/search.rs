use std::fs;

use proptest::prelude::*;
use tabanon_core::anonymizer::{apply, search, suppression_limit, Objective, SearchConfig, Strategy as Search};
use tabanon_core::dataset::{load_csv, load_schema, read_csv, write_csv};
use tabanon_core::hierarchy::{load_hierarchy, Bin};
use tabanon_core::metrics::{average_rr, maximum_rr};
use tabanon_core::{
    partition, AttributeRole, AttributeSchema, CsvOptions, DataType, Dataset, Error, Hierarchy, HierarchySet,
    PrivacyConstraint, Value,
};

fn schema() -> Vec<AttributeSchema> {
    vec![
        AttributeSchema::new("age", DataType::Discrete, AttributeRole::QuasiIdentifier),
        AttributeSchema::new("zip", DataType::Nominal, AttributeRole::QuasiIdentifier),
        AttributeSchema::new("diagnosis", DataType::Nominal, AttributeRole::Sensitive),
    ]
}

fn hierarchies() -> HierarchySet {
    let decades = (0..10)
        .map(|i| {
            Bin::new(
                i as f64 * 10.0,
                i as f64 * 10.0 + 10.0,
                format!("{}-{}", i * 10, i * 10 + 9),
            )
        })
        .collect();
    let halves = vec![Bin::new(0.0, 50.0, "0-49"), Bin::new(50.0, 100.0, "50-99")];
    let zips = ["1101", "1102", "1201", "1202"]
        .iter()
        .map(|z| vec![z.to_string(), format!("{}*", &z[..3]), format!("{}**", &z[..2])]);
    [
        Hierarchy::interval("age", vec![decades, halves]).unwrap(),
        Hierarchy::categorical("zip", zips).unwrap(),
    ]
    .into_iter()
    .collect()
}

fn dataset(rows: &[(i64, usize, usize)]) -> Dataset {
    let zips = ["1101", "1102", "1201", "1202"];
    let diagnoses = ["flu", "asthma", "cold"];
    let records = rows
        .iter()
        .map(|&(age, zip, dx)| {
            vec![
                Value::Discrete(age),
                Value::Nominal(zips[zip].into()),
                Value::Nominal(diagnoses[dx].into()),
            ]
        })
        .collect();
    Dataset::new(schema(), records).unwrap()
}

fn rows() -> impl Strategy<Value = Vec<(i64, usize, usize)>> {
    prop::collection::vec((0i64..100, 0usize..4, 0usize..3), 1..24)
}

fn objective() -> impl Strategy<Value = Objective> {
    prop_oneof![
        Just(Objective::Nue),
        Just(Objective::Ig),
        Just(Objective::GgMean),
        Just(Objective::NueAvgRrTiebreak),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pruned_matches_exhaustive(
        rows in rows(),
        k in 1usize..5,
        budget in prop_oneof![Just(0.0), Just(0.1), Just(0.25)],
        objective in objective(),
    ) {
        let d = dataset(&rows);
        let h = hierarchies();
        let cfg = SearchConfig::new(vec![PrivacyConstraint::k_anonymity(k).unwrap()])
            .with_budget(budget)
            .with_objective(objective);
        let ex = search(&d, &h, &cfg.clone().with_strategy(Search::Exhaustive));
        let pr = search(&d, &h, &cfg.with_strategy(Search::PrunedBfs));
        match (ex, pr) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.best.scheme, &b.best.scheme);
                prop_assert_eq!(&a.best.suppressed, &b.best.suppressed);
                prop_assert_eq!(a.best.loss_score, b.best.loss_score);
            }
            (Err(Error::NoSolution { .. }), Err(Error::NoSolution { .. })) => {}
            (a, b) => prop_assert!(false, "strategies disagree: {:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn released_table_meets_k(
        rows in rows(),
        k in 1usize..5,
        budget in prop_oneof![Just(0.0), Just(0.2)],
    ) {
        let d = dataset(&rows);
        let h = hierarchies();
        let cfg = SearchConfig::new(vec![PrivacyConstraint::k_anonymity(k).unwrap()]).with_budget(budget);
        let Ok(out) = search(&d, &h, &cfg) else { return Ok(()) };
        let applied = apply(&d, &out.best, &h).unwrap();
        prop_assert!(applied.suppressed.len() <= suppression_limit(budget, d.n()));
        prop_assert_eq!(applied.dataset.n() + applied.suppressed.len(), d.n());
        let part = partition(&applied.dataset);
        prop_assert!(part.classes().iter().all(|c| c.size() >= k));
        prop_assert!(maximum_rr(&part).unwrap() <= 100.0 / k as f64 + 1e-9);
        prop_assert!(average_rr(&part).unwrap() <= maximum_rr(&part).unwrap() + 1e-9);
    }
}

#[test]
fn full_generalization_is_reached_when_needed() {
    let d = dataset(&[(5, 0, 0), (95, 3, 1)]);
    let cfg = SearchConfig::new(vec![PrivacyConstraint::k_anonymity(2).unwrap()]);
    let out = search(&d, &hierarchies(), &cfg).unwrap();
    assert_eq!(out.best.scheme.levels(), &[3, 3]);
    let applied = apply(&d, &out.best, &hierarchies()).unwrap();
    assert!(applied
        .dataset
        .records()
        .iter()
        .all(|r| r[0] == Value::Suppressed && r[1] == Value::Suppressed));
}

#[test]
fn files_round_trip_through_search() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("schema.json"),
        r#"{"format": "plaintext", "attributes": [
            {"name": "id", "data_type": "nominal", "role": "identifier"},
            {"name": "age", "data_type": "discrete", "role": "quasi_identifier", "hierarchy": "age.json"},
            {"name": "zip", "data_type": "nominal", "role": "quasi_identifier", "hierarchy": "zip.csv"},
            {"name": "diagnosis", "data_type": "nominal", "role": "sensitive"}]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("age.json"),
        r#"{"attribute": "age", "levels": [[{"lo": 0, "hi": 50, "label": "0-49"}, {"lo": 50, "hi": 100, "label": "50-99"}]]}"#,
    )
    .unwrap();
    fs::write(dir.path().join("zip.csv"), "1101;110*\n1102;110*\n1201;120*\n").unwrap();
    fs::write(
        dir.path().join("data.csv"),
        "id,age,zip,diagnosis\na,21,1101,flu\nb,34,1102,cold\nc,61,1201,flu\nd,70,1201,asthma\n",
    )
    .unwrap();

    let schema = load_schema(&dir.path().join("schema.json")).unwrap();
    let d = load_csv(&dir.path().join("data.csv"), &schema, &CsvOptions::default())
        .unwrap()
        .drop_identifiers();
    let h: HierarchySet = schema
        .iter()
        .filter_map(|a| a.hierarchy.as_ref().map(|p| load_hierarchy(p, a).unwrap()))
        .collect();
    let cfg = SearchConfig::new(vec![
        PrivacyConstraint::k_anonymity(2).unwrap(),
        PrivacyConstraint::l_diversity(2, "diagnosis").unwrap(),
    ]);
    let out = search(&d, &h, &cfg).unwrap();
    assert_eq!(out.best.scheme.levels(), &[1, 1]);

    let applied = apply(&d, &out.best, &h).unwrap();
    let mut buf = Vec::new();
    write_csv(&applied.dataset, &mut buf, &CsvOptions::default()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text,
        "age,zip,diagnosis\n0-49,110*,flu\n0-49,110*,cold\n50-99,120*,flu\n50-99,120*,asthma\n"
    );

    let released_schema: Vec<AttributeSchema> = applied.dataset.schema().to_vec();
    let back = read_csv(text.as_bytes(), &released_schema, &CsvOptions::default()).unwrap();
    assert_eq!(back.records(), applied.dataset.records());
}
