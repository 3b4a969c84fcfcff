use std::collections::BTreeMap;

use serde_json::Value;

use super::config::DataStageConfig;
use super::runs::{run_seeded, StochasticOutcome, Stopwatch};
use crate::engine::{mean_confidence, train, Tensor, TrainConfig};
use crate::error::{Error, Result};
use crate::evidence;
use crate::mock::{build_mock_model, mock_model_recipe};
use crate::report::{
    catalog, sort_findings, DatasetSummary, Finding, InterfaceSummary, Locus, Report,
    Severity, SkippedCheck, Stage, Verdict, SCHEMA_VERSION,
};
use crate::spec::{is_missing_token, DataInterface, DataKind, Dataset, ModelInterface, TaskType};

/// Names of the data-stage checks, in execution order.
pub const DATA_CHECKS: [&str; 7] = [
    "missing_values",
    "missing_labels",
    "class_imbalance",
    "categorical_encoding",
    "scaling",
    "label_problem_match",
    "data_learnability",
];

/// Row indices listed in a missing-label finding.
const LISTED_ROWS: usize = 10;
/// Distinct label values listed in a label-mismatch finding.
const LISTED_LABELS: usize = 20;

fn column_locus(dataset: &Dataset, index: usize) -> Locus {
    Locus::Column {
        index,
        name: dataset.feature_names()[index].clone(),
    }
}

/// One error per feature column that has missing cells.
pub fn check_missing_values(dataset: &Dataset) -> Result<Vec<Finding>> {
    let mut findings = Vec::new();
    for (i, profile) in dataset.profiles().iter().enumerate() {
        if profile.missing_count == 0 {
            continue;
        }
        findings.push(Finding::new(
            catalog::MISSING_VALUES,
            Severity::Error,
            column_locus(dataset, i),
            format!(
                "column '{}' has {} missing value(s) out of {} rows",
                profile.name,
                profile.missing_count,
                dataset.num_rows()
            ),
            evidence! {
                "column" => profile.name.clone(),
                "missing_count" => profile.missing_count,
                "rows" => dataset.num_rows(),
            },
        )?);
    }
    Ok(findings)
}

/// One error if any label cell is missing; evidence lists the first rows.
pub fn check_missing_labels(dataset: &Dataset) -> Result<Vec<Finding>> {
    let rows: Vec<usize> = dataset
        .raw_labels()
        .iter()
        .enumerate()
        .filter(|(_, cell)| is_missing_token(cell))
        .map(|(i, _)| i)
        .collect();
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        catalog::MISSING_LABELS,
        Severity::Error,
        Locus::Global,
        format!(
            "label column '{}' has {} missing value(s)",
            dataset.label_name(),
            rows.len()
        ),
        evidence! {
            "column" => dataset.label_name(),
            "missing_count" => rows.len(),
            "rows" => rows.iter().take(LISTED_ROWS).copied().collect::<Vec<_>>(),
        },
    )?])
}

/// Counts of each present (non-missing, numeric) label value, keyed by the
/// value's text form, ordered by value.
fn label_counts(dataset: &Dataset) -> Vec<(f64, usize)> {
    let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for &v in dataset.labels() {
        if v.is_nan() {
            continue;
        }
        let v = if v == 0.0 { 0.0 } else { v };
        counts.entry(v.to_bits()).or_insert((v, 0)).1 += 1;
    }
    let mut out: Vec<(f64, usize)> = counts.into_values().collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn label_text(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        v.to_string()
    }
}

/// Warning when the most frequent class outnumbers the least frequent one by
/// more than `threshold`. Returns `None` when the check does not apply
/// (regression).
pub fn check_class_imbalance(
    dataset: &Dataset,
    data_interface: &DataInterface,
    threshold: f64,
) -> Result<Option<Vec<Finding>>> {
    if !data_interface.task_type.is_classification() {
        return Ok(None);
    }
    let counts = label_counts(dataset);
    if counts.len() < 2 {
        return Ok(Some(Vec::new()));
    }
    let max = counts.iter().map(|c| c.1).max().unwrap_or(0);
    let min = counts.iter().map(|c| c.1).min().unwrap_or(0);
    let ratio = max as f64 / min as f64;
    if ratio <= threshold {
        return Ok(Some(Vec::new()));
    }
    let mut per_class = serde_json::Map::new();
    for (v, n) in &counts {
        per_class.insert(label_text(*v), Value::from(*n));
    }
    Ok(Some(vec![Finding::new(
        catalog::CLASS_IMBALANCE,
        Severity::Warning,
        Locus::Global,
        format!("class counts are imbalanced: largest/smallest = {max}/{min} = {ratio:.2} > {threshold}"),
        evidence! {
            "class_counts" => Value::Object(per_class),
            "ratio" => ratio,
            "threshold" => threshold,
        },
    )?]))
}

/// One error per feature column that is categorical or mixed.
pub fn check_categorical_encoding(dataset: &Dataset) -> Result<Vec<Finding>> {
    let mut findings = Vec::new();
    for (i, profile) in dataset.profiles().iter().enumerate() {
        let kind = match profile.kind {
            DataKind::Numeric => continue,
            DataKind::Categorical => "categorical",
            DataKind::Mixed => "mixed",
        };
        findings.push(Finding::new(
            catalog::MISSING_ENCODING,
            Severity::Error,
            column_locus(dataset, i),
            format!("column '{}' is {kind} and not encoded as numbers", profile.name),
            evidence! {
                "column" => profile.name.clone(),
                "kind" => kind,
                "distinct_count" => profile.distinct_count,
            },
        )?);
    }
    Ok(findings)
}

/// One warning per numeric feature column whose range or mean is too large.
/// Labels are not inspected.
pub fn check_scaling(
    dataset: &Dataset,
    range_threshold: f64,
    mean_threshold: f64,
) -> Result<Vec<Finding>> {
    let mut findings = Vec::new();
    for (i, profile) in dataset.profiles().iter().enumerate() {
        if profile.kind != DataKind::Numeric {
            continue;
        }
        let (Some(min), Some(max), Some(mean)) = (profile.min, profile.max, profile.mean) else {
            continue;
        };
        let range = max - min;
        if range <= range_threshold && mean.abs() <= mean_threshold {
            continue;
        }
        findings.push(Finding::new(
            catalog::MISSING_SCALING,
            Severity::Warning,
            column_locus(dataset, i),
            format!(
                "column '{}' is not scaled: range [{min}, {max}], mean {mean:.4}",
                profile.name
            ),
            evidence! {
                "column" => profile.name.clone(),
                "min" => min,
                "max" => max,
                "mean" => mean,
                "range_threshold" => range_threshold,
                "mean_threshold" => mean_threshold,
            },
        )?);
    }
    Ok(findings)
}

/// Error when the labels do not fit the declared task: non-numeric labels,
/// non-integer class labels, class ids outside `0..num_classes`, or a number
/// of distinct classes different from the interface's.
pub fn check_label_problem_match(
    dataset: &Dataset,
    data_interface: &DataInterface,
) -> Result<Vec<Finding>> {
    let task = data_interface.task_type;
    let label_kind = dataset.label_profile().kind;
    let counts = label_counts(dataset);
    let distinct: Vec<String> = counts.iter().map(|(v, _)| label_text(*v)).collect();
    let mut problems = Vec::new();
    if label_kind != DataKind::Numeric {
        problems.push(format!(
            "labels are {} but {} needs numeric labels",
            match label_kind {
                DataKind::Categorical => "categorical",
                _ => "mixed",
            },
            task.as_str()
        ));
    } else if task.is_classification() {
        let expected = data_interface.num_classes;
        if counts.iter().any(|(v, _)| v.fract() != 0.0) {
            problems.push("class labels must be integers".to_string());
        } else if counts.iter().any(|(v, _)| *v < 0.0 || *v >= expected as f64) {
            problems.push(format!("class labels must be ids 0..{}", expected - 1));
        }
        if counts.len() != expected {
            problems.push(format!(
                "{} expects {expected} distinct labels, found {}",
                task.as_str(),
                counts.len()
            ));
        }
    }
    if problems.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        catalog::LABEL_MISMATCH,
        Severity::Error,
        Locus::Global,
        format!("labels do not match the problem definition: {}", problems.join("; ")),
        evidence! {
            "task_type" => task.as_str(),
            "num_classes" => data_interface.num_classes,
            "distinct_count" => counts.len(),
            "distinct_labels" => distinct.into_iter().take(LISTED_LABELS).collect::<Vec<_>>(),
            "problems" => problems,
        },
    )?])
}

fn check_interfaces(
    dataset: &Dataset,
    data_interface: &DataInterface,
    model_interface: &ModelInterface,
) -> Result<()> {
    data_interface.validate()?;
    if dataset.num_features() != data_interface.num_features {
        return Err(Error::shape(
            "dataset vs data interface",
            format!("{} features", data_interface.num_features),
            format!("{} feature columns", dataset.num_features()),
        ));
    }
    if model_interface.task_type != data_interface.task_type {
        return Err(Error::contract(format!(
            "model interface task {} differs from data interface task {}",
            model_interface.task_type.as_str(),
            data_interface.task_type.as_str()
        )));
    }
    Ok(())
}

/// Training targets for the mock model: the label column for regression, a
/// one-hot matrix otherwise (invalid labels become NaN rows).
fn mock_targets(dataset: &Dataset, task: TaskType, output_units: usize) -> Result<Tensor> {
    match task {
        TaskType::Regression => Ok(dataset.label_tensor()),
        _ => dataset.one_hot(output_units),
    }
}

/// One seeded learnability run: trains the mock model for the interfaces on
/// the dataset and reports whether it failed to learn.
pub fn learnability_run(
    dataset: &Dataset,
    data_interface: &DataInterface,
    model_interface: &ModelInterface,
    config: &DataStageConfig,
    seed: u64,
) -> Result<Vec<Finding>> {
    check_interfaces(dataset, data_interface, model_interface)?;
    let features = dataset.num_features();
    let classes = data_interface.num_classes;
    let recipe = mock_model_recipe(model_interface, features, classes)?;
    let mut model = build_mock_model(&recipe, features, seed)?;
    let x = dataset.feature_tensor();
    let y = mock_targets(dataset, data_interface.task_type, recipe.output_units)?;
    let budget = &config.learnability;
    let trace = train(
        &mut model,
        &x,
        &y,
        &TrainConfig {
            loss: recipe.loss_kind,
            metric: recipe.metric_kind,
            optimizer: budget.optimizer,
            learning_rate: budget.learning_rate,
            epochs: budget.epochs,
            batch_size: budget.batch_size,
            seed,
        },
    )?;

    let non_finite_epoch = if trace.initial_loss.is_finite() {
        trace.first_non_finite_epoch()
    } else {
        Some(0)
    };
    if let Some(epoch) = non_finite_epoch {
        let loss = if epoch == 0 {
            trace.initial_loss
        } else {
            trace.losses[epoch - 1]
        };
        return Ok(vec![Finding::new(
            catalog::DATA_NAN_LOSS,
            Severity::Error,
            Locus::Global,
            format!("mock model: {loss} loss at epoch {epoch}"),
            evidence! { "epoch" => epoch, "loss" => loss, "seed" => seed },
        )?]);
    }

    let mut symptoms = Vec::new();
    let mut ev = evidence! {
        "seed" => seed,
        "initial_loss" => trace.initial_loss,
        "final_loss" => trace.final_loss(),
    };
    if data_interface.task_type.is_classification() {
        let chance = 1.0 / classes as f64;
        let accuracy = trace.final_metric();
        let confidence = mean_confidence(&model.forward(&x)?);
        ev.insert("accuracy".into(), crate::report::number(accuracy));
        ev.insert("mean_confidence".into(), crate::report::number(confidence));
        if accuracy < chance + 0.1 {
            symptoms.push(format!("accuracy {accuracy:.3} is near chance ({chance:.3})"));
        }
        if confidence < chance + 0.05 {
            symptoms.push(format!("low confidence {confidence:.3}"));
        }
    } else if trace.final_loss() > 0.9 * trace.initial_loss {
        symptoms.push(format!(
            "loss only fell from {:.4} to {:.4}",
            trace.initial_loss,
            trace.final_loss()
        ));
    }
    if symptoms.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        catalog::DATA_NOT_LEARNING,
        Severity::Error,
        Locus::Global,
        format!("a simple mock model does not learn from this data: {}", symptoms.join("; ")),
        ev,
    )?])
}

/// Learnability over `config.runs` seeded runs (seeds `seed + i`), majority
/// voted.
pub fn check_data_learnability(
    dataset: &Dataset,
    data_interface: &DataInterface,
    model_interface: &ModelInterface,
    config: &DataStageConfig,
) -> Result<StochasticOutcome> {
    config.validate()?;
    check_interfaces(dataset, data_interface, model_interface)?;
    run_seeded(config.runs, config.seed, |seed| {
        learnability_run(dataset, data_interface, model_interface, config, seed)
    })
}

/// Runs every data-stage check in fixed order and assembles the report.
///
/// The learnability check only runs when the structural checks found no
/// errors, unless `config.force_learnability` is set.
pub fn run_data_stage(
    dataset: &Dataset,
    data_interface: &DataInterface,
    model_interface: &ModelInterface,
    config: &DataStageConfig,
) -> Result<Report> {
    config.validate()?;
    check_interfaces(dataset, data_interface, model_interface)?;
    let mut watch = Stopwatch::default();
    let mut executed = Vec::new();
    let mut skipped = Vec::new();
    let mut findings = Vec::new();

    findings.extend(watch.time(DATA_CHECKS[0], || check_missing_values(dataset))?);
    executed.push(DATA_CHECKS[0]);
    findings.extend(watch.time(DATA_CHECKS[1], || check_missing_labels(dataset))?);
    executed.push(DATA_CHECKS[1]);
    match watch.time(DATA_CHECKS[2], || {
        check_class_imbalance(dataset, data_interface, config.imbalance_ratio_threshold)
    })? {
        Some(f) => {
            findings.extend(f);
            executed.push(DATA_CHECKS[2]);
        }
        None => skipped.push(SkippedCheck {
            check: DATA_CHECKS[2].to_string(),
            reason: "not applicable to regression".to_string(),
        }),
    }
    findings.extend(watch.time(DATA_CHECKS[3], || check_categorical_encoding(dataset))?);
    executed.push(DATA_CHECKS[3]);
    findings.extend(watch.time(DATA_CHECKS[4], || {
        check_scaling(dataset, config.scaling_range_threshold, config.scaling_mean_threshold)
    })?);
    executed.push(DATA_CHECKS[4]);
    findings.extend(watch.time(DATA_CHECKS[5], || check_label_problem_match(dataset, data_interface))?);
    executed.push(DATA_CHECKS[5]);

    let mut blocking: Vec<&str> = findings
        .iter()
        .filter(|f| f.is_error())
        .map(|f| f.check_id.as_str())
        .collect();
    blocking.sort_unstable();
    blocking.dedup();
    let mut runs = Vec::new();
    if blocking.is_empty() || config.force_learnability {
        let outcome = watch.time(DATA_CHECKS[6], || {
            check_data_learnability(dataset, data_interface, model_interface, config)
        })?;
        findings.extend(outcome.findings);
        runs = outcome.runs;
        executed.push(DATA_CHECKS[6]);
    } else {
        skipped.push(SkippedCheck {
            check: DATA_CHECKS[6].to_string(),
            reason: format!("structural errors present: {}", blocking.join(", ")),
        });
    }

    sort_findings(&mut findings);
    let verdict = Verdict::of(&findings);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        stage: Stage::Data,
        interfaces: InterfaceSummary {
            data_interface: Some(data_interface.clone()),
            model_interface: Some(model_interface.clone()),
            dataset: Some(DatasetSummary {
                rows: dataset.num_rows(),
                features: dataset.num_features(),
                label: dataset.label_name().to_string(),
            }),
            model_spec: None,
        },
        config: serde_json::to_value(config)
            .map_err(|e| Error::contract(format!("config is not serializable: {e}")))?,
        executed_checks: executed.into_iter().map(String::from).collect(),
        skipped_checks: skipped,
        findings,
        verdict,
        runs,
        timings: Some(watch.into_timings()),
    })
}
