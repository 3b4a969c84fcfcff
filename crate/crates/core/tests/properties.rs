use mockcheck::checks::*;
use mockcheck::engine::Tensor;
use mockcheck::evidence;
use mockcheck::mock::{generate_mock_data, MockDataConfig};
use mockcheck::report::*;
use mockcheck::spec::*;
use proptest::prelude::*;

fn di(task_type: TaskType, num_features: usize, num_classes: usize) -> DataInterface {
    DataInterface {
        num_features,
        data_kind: DataKind::Numeric,
        task_type,
        num_classes,
    }
}

fn nearest_centroid_accuracy(x: &Tensor, labels: &[usize], classes: usize) -> f64 {
    let d = x.cols();
    let mut centroids = vec![vec![0.0; d]; classes];
    let mut counts = vec![0usize; classes];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for (s, v) in centroids[c].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for (c, n) in centroids.iter_mut().zip(&counts) {
        c.iter_mut().for_each(|v| *v /= *n as f64);
    }
    let dist = |row: &[f64], c: &[f64]| -> f64 { row.iter().zip(c).map(|(p, q)| (p - q).powi(2)).sum() };
    let correct = labels
        .iter()
        .enumerate()
        .filter(|(i, &c)| {
            let row = x.row(*i);
            (0..classes).all(|o| o == c || dist(row, &centroids[c]) <= dist(row, &centroids[o]))
        })
        .count();
    correct as f64 / labels.len() as f64
}

#[test]
fn mock_classes_are_separable_across_seeds() {
    for seed in 0..20u64 {
        for classes in 2..=5 {
            for features in [2, 3, 6] {
                let task = if classes == 2 {
                    TaskType::BinaryClassification
                } else {
                    TaskType::MulticlassClassification
                };
                let data = generate_mock_data(&di(task, features, classes), &MockDataConfig::new(seed)).unwrap();
                let acc = nearest_centroid_accuracy(&data.feature_tensor(), &data.class_labels().unwrap(), classes);
                assert!(acc >= 0.95, "seed {seed} C={classes} F={features}: {acc}");
            }
        }
    }
}

fn finding(id: &str, column: usize) -> Finding {
    Finding::new(
        id,
        Severity::Error,
        Locus::Column {
            index: column,
            name: format!("c{column}"),
        },
        "m",
        evidence! { "column" => column },
    )
    .unwrap()
}

const VOTE_IDS: [&str; 3] = [catalog::OSCILLATING_LOSS, catalog::MODEL_NAN_LOSS, catalog::SLOW_CONVERGENCE];

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![
        6 => (-1000i32..1000).prop_map(|v| format!("{}", v as f64 / 8.0)),
        1 => Just(String::new()),
        1 => Just("NaN".to_string()),
        1 => prop::sample::select(vec!["red", "blue", "x"]).prop_map(String::from),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn voting_never_invents_or_drops_unanimous(
        presence in prop::collection::vec(prop::collection::vec(any::<bool>(), 3 * 4), 3),
    ) {
        // presence[run][id * 4 + column]
        let per_run: Vec<Vec<Finding>> = presence
            .iter()
            .map(|run| {
                run.iter()
                    .enumerate()
                    .filter(|(_, p)| **p)
                    .map(|(k, _)| finding(VOTE_IDS[k / 4], k % 4))
                    .collect()
            })
            .collect();
        let kept = majority_vote(&per_run, 3).unwrap();
        for k in 0..12 {
            let votes = presence.iter().filter(|run| run[k]).count();
            let present = kept.iter().any(|f| f.key() == finding(VOTE_IDS[k / 4], k % 4).key());
            prop_assert_eq!(present, votes >= 2, "key {} votes {}", k, votes);
        }
        let mut sorted = kept.clone();
        sort_findings(&mut sorted);
        prop_assert_eq!(sorted, kept);
    }

    #[test]
    fn profiles_and_deterministic_findings_ignore_row_order(
        rows in prop::collection::vec(prop::collection::vec(cell(), 4), 2..25),
        seed in any::<u64>(),
    ) {
        let header = ["a", "b", "c", "y"];
        let original = read_dataset(csv_text(&header, &rows).as_bytes(), &LabelColumn::from("y")).unwrap();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        use rand::{seq::SliceRandom, SeedableRng};
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let permuted_rows: Vec<Vec<String>> = order.iter().map(|&i| rows[i].clone()).collect();
        let permuted = read_dataset(csv_text(&header, &permuted_rows).as_bytes(), &LabelColumn::from("y")).unwrap();
        prop_assert_eq!(original.profiles(), permuted.profiles());
        prop_assert_eq!(original.label_profile(), permuted.label_profile());

        let d = di(TaskType::BinaryClassification, 3, 2);
        let run = |ds: &Dataset| {
            let mut f = check_missing_values(ds).unwrap();
            f.extend(check_class_imbalance(ds, &d, 1.5).unwrap().unwrap());
            f.extend(check_categorical_encoding(ds).unwrap());
            f.extend(check_scaling(ds, 20.0, 5.0).unwrap());
            f.extend(check_label_problem_match(ds, &d).unwrap());
            f
        };
        prop_assert_eq!(run(&original), run(&permuted));
        // Missing-label evidence lists row indices, so only its presence is order-free.
        prop_assert_eq!(
            check_missing_labels(&original).unwrap().len(),
            check_missing_labels(&permuted).unwrap().len()
        );
    }

    #[test]
    fn adding_a_missing_cell_never_removes_findings(
        seed in 0u64..1000, row in 0usize..200, col in 0usize..3,
    ) {
        let d = di(TaskType::BinaryClassification, 3, 2);
        let data = generate_mock_data(&d, &MockDataConfig::new(seed)).unwrap();
        let mut column = data.feature_column(col);
        column[row] = f64::NAN;
        let damaged = data.with_columns_replaced(vec![(col, column)]).unwrap();
        let mi = ModelInterface { architecture_type: ArchitectureType::Fcnn, task_type: d.task_type };
        let config = DataStageConfig { runs: 1, ..Default::default() };
        let before = run_data_stage(&data, &d, &mi, &config).unwrap();
        let after = run_data_stage(&damaged, &d, &mi, &config).unwrap();
        prop_assert!(after.findings.len() > before.findings.len());
        prop_assert!(after.has_finding(catalog::MISSING_VALUES));
    }

    #[test]
    fn mock_data_is_deterministic(seed in any::<u64>(), features in 1usize..8, classes in 3usize..6) {
        for d in [
            di(TaskType::Regression, features, 1),
            di(TaskType::BinaryClassification, features, 2),
            di(TaskType::MulticlassClassification, features, classes),
        ] {
            let a = generate_mock_data(&d, &MockDataConfig::new(seed)).unwrap();
            let b = generate_mock_data(&d, &MockDataConfig::new(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn monotone_traces_never_oscillate(
        start in 0.1f64..100.0,
        drops in prop::collection::vec(0.0f64..1.0, 1..20),
    ) {
        let mut trace = vec![start];
        for d in drops {
            let last = *trace.last().unwrap();
            trace.push(last * (1.0 - d));
        }
        prop_assert_eq!(count_reversals(&trace, 0.10), 0);
    }
}

fn sample_report() -> Report {
    let d = di(TaskType::BinaryClassification, 2, 2);
    let data = read_dataset(
        "a,b,y\n1,,0\n20000,3,1\n4,5,0\n6,red,1\n".as_bytes(),
        &LabelColumn::from("y"),
    )
    .unwrap();
    let mi = ModelInterface {
        architecture_type: ArchitectureType::Fcnn,
        task_type: d.task_type,
    };
    let config = DataStageConfig {
        force_learnability: true,
        ..Default::default()
    };
    run_data_stage(&data, &d, &mi, &config).unwrap()
}

#[test]
fn json_report_round_trips() {
    let report = sample_report();
    assert!(report.findings.len() >= 3);
    let json = render_report(&report, ReportFormat::Json).unwrap();
    assert_eq!(parse_report(&json).unwrap(), report);
    let stripped = report.without_timings();
    let json = render_report(&stripped, ReportFormat::Json).unwrap();
    assert!(!json.contains("timings"));
    assert_eq!(parse_report(&json).unwrap(), stripped);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["schema_version"], 1);
}

#[test]
fn non_finite_evidence_survives_round_trip() {
    let report = sample_report();
    let nan = report
        .findings
        .iter()
        .find(|f| f.check_id == catalog::DATA_NAN_LOSS)
        .expect("forced learnability on NaN data");
    assert_eq!(nan.evidence["loss"], "NaN");
}

#[test]
fn text_report_lists_findings() {
    let report = sample_report();
    let text = render_report(&report, ReportFormat::Text).unwrap();
    assert!(text.contains("FAIL"));
    for f in &report.findings {
        let line = format!("{} [{}] {} → {}", f.check_id, f.severity, f.message, f.fix);
        assert!(text.contains(&line), "missing line {line}");
    }
    let clean_di = di(TaskType::Regression, 3, 1);
    let clean = generate_mock_data(&clean_di, &MockDataConfig::new(1)).unwrap();
    let mi = ModelInterface {
        architecture_type: ArchitectureType::Fcnn,
        task_type: TaskType::Regression,
    };
    let pass = run_data_stage(&clean, &clean_di, &mi, &DataStageConfig::default()).unwrap();
    assert!(pass.findings.is_empty());
    assert!(render_report(&pass, ReportFormat::Text).unwrap().contains("PASS"));
}

#[test]
fn every_catalog_id_has_a_fix() {
    for entry in CATALOG.iter() {
        assert!(!fix_for(entry.check_id).unwrap().is_empty());
    }
    assert!(fix_for("not_a_check").is_err());
}
