use super::config::{BinaryOutputStrictness, ModelStageConfig};
use super::runs::{run_seeded, StochasticOutcome, Stopwatch};
use crate::engine::{
    evaluate, infer_shapes, train, Activation, LayerDef, LossKind, MetricKind, Model, Shape, Tensor,
    TrainConfig,
};
use crate::error::{Error, Result};
use crate::evidence;
use crate::mock::{generate_mock_data, MockDataConfig};
use crate::report::{
    catalog, number, sort_findings, Finding, InterfaceSummary, Locus, Report, Severity,
    SkippedCheck, Stage, Verdict, SCHEMA_VERSION,
};
use crate::spec::{DataInterface, Dataset, ModelSpec, TaskType};

/// Names of the model-stage checks, in execution order.
pub const MODEL_CHECKS: [&str; 8] = [
    "input_shape",
    "output_shape",
    "hidden_activations",
    "output_activation",
    "learning_rate",
    "loss_function",
    "metrics",
    "training_dynamics",
];

/// Index of the first layer at which shape propagation fails, with the error.
fn composition_failure(spec: &ModelSpec) -> Option<(usize, Error)> {
    infer_shapes(spec.input_dim, &spec.layers).err()?;
    (1..=spec.layers.len()).find_map(|k| {
        infer_shapes(spec.input_dim, &spec.layers[..k])
            .err()
            .map(|e| (k - 1, e))
    })
}

fn is_conv_input(spec: &ModelSpec) -> bool {
    matches!(
        spec.layers.iter().find(|l| l.is_trainable()),
        Some(LayerDef::Conv1d { .. })
    )
}

/// Error when the input size differs from the feature count (sequence length
/// for conv models), or when consecutive layer shapes do not compose.
pub fn check_input_shape(spec: &ModelSpec, data_interface: &DataInterface) -> Result<Vec<Finding>> {
    let mut findings = Vec::new();
    if spec.input_dim != data_interface.num_features {
        let what = if is_conv_input(spec) { "sequence length" } else { "input size" };
        findings.push(Finding::new(
            catalog::INPUT_SHAPE,
            Severity::Error,
            Locus::Layer { index: 0 },
            format!(
                "model {what} is {} but the data has {} features",
                spec.input_dim, data_interface.num_features
            ),
            evidence! {
                "input_dim" => spec.input_dim,
                "num_features" => data_interface.num_features,
            },
        )?);
    }
    if let Some((index, err)) = composition_failure(spec) {
        findings.push(Finding::new(
            catalog::INPUT_SHAPE,
            Severity::Error,
            Locus::Layer { index },
            format!("layer {index} cannot take the previous layer's output: {err}"),
            evidence! { "layer" => index, "detail" => err.to_string() },
        )?);
    }
    Ok(findings)
}

/// Output units required by a task: exact count, or the accepted set.
fn expected_output_units(data_interface: &DataInterface) -> Vec<usize> {
    match data_interface.task_type {
        TaskType::Regression => vec![1],
        TaskType::BinaryClassification => vec![1, 2],
        TaskType::MulticlassClassification => vec![data_interface.num_classes],
    }
}

/// Output width of the model, or `None` when it cannot be determined. The
/// second value is true when the output is still a sequence.
fn output_units(spec: &ModelSpec) -> Option<(usize, bool)> {
    match infer_shapes(spec.input_dim, &spec.layers) {
        Ok(shapes) => match shapes.last()? {
            Shape::Flat(n) => Some((*n, false)),
            seq => Some((seq.size(), true)),
        },
        Err(_) => match spec.layers.get(spec.output_layer_index()?)? {
            LayerDef::Dense { units, .. } => Some((*units, false)),
            _ => None,
        },
    }
}

/// Error unless the output width fits the task: 1 for regression, 1 or 2 for
/// binary classification, `num_classes` for multiclass classification.
pub fn check_output_shape(spec: &ModelSpec, data_interface: &DataInterface) -> Result<Vec<Finding>> {
    let index = spec.output_layer_index().unwrap_or(spec.layers.len() - 1);
    let Some((units, is_sequence)) = output_units(spec) else {
        return Ok(Vec::new());
    };
    let expected = expected_output_units(data_interface);
    let task = data_interface.task_type.as_str();
    let message = if is_sequence {
        format!("model output is a sequence of {units} values; add flatten and a dense output layer")
    } else if !expected.contains(&units) {
        let wanted = expected.iter().map(usize::to_string).collect::<Vec<_>>().join(" or ");
        format!("output layer has {units} unit(s) but {task} needs {wanted}")
    } else {
        return Ok(Vec::new());
    };
    Ok(vec![Finding::new(
        catalog::OUTPUT_SHAPE,
        Severity::Error,
        Locus::Layer { index },
        message,
        evidence! {
            "output_units" => units,
            "expected_units" => expected,
            "task_type" => task,
        },
    )?])
}

/// Activation applied after trainable layer `index`: its own when non-linear,
/// otherwise the first non-linear standalone activation before the next
/// trainable layer.
fn effective_activation(layers: &[LayerDef], index: usize) -> Activation {
    let own = layers[index].activation().unwrap_or(Activation::None);
    if !own.is_identity() {
        return own;
    }
    layers[index + 1..]
        .iter()
        .take_while(|l| !l.is_trainable())
        .filter_map(|l| match l {
            LayerDef::Activation { activation } => Some(*activation),
            _ => None,
        })
        .find(|a| !a.is_identity())
        .unwrap_or(own)
}

/// Warning for every hidden dense/conv layer without a non-linear activation.
pub fn check_hidden_activations(spec: &ModelSpec) -> Result<Vec<Finding>> {
    let Some(output) = spec.output_layer_index() else {
        return Ok(Vec::new());
    };
    let mut findings = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate().take(output) {
        if !layer.is_trainable() {
            continue;
        }
        let act = effective_activation(&spec.layers, i);
        if act.is_identity() {
            findings.push(Finding::new(
                catalog::MISSING_ACTIVATION,
                Severity::Warning,
                Locus::Layer { index: i },
                format!("hidden layer {i} ({layer}) has no non-linear activation"),
                evidence! { "layer" => i, "activation" => act.as_str() },
            )?);
        }
    }
    Ok(findings)
}

/// Error unless the output activation fits the task: linear for regression,
/// softmax for multiclass, sigmoid for binary (lenient mode also accepts a
/// 2-unit softmax).
pub fn check_output_activation(
    spec: &ModelSpec,
    data_interface: &DataInterface,
    strictness: BinaryOutputStrictness,
) -> Result<Vec<Finding>> {
    let Some(index) = spec.output_layer_index() else {
        return Ok(Vec::new());
    };
    let act = effective_activation(&spec.layers, index);
    let act = if act.is_identity() { Activation::Linear } else { act };
    let units = output_units(spec).map(|(u, _)| u);
    let (ok, wanted) = match data_interface.task_type {
        TaskType::Regression => (act == Activation::Linear, "linear"),
        TaskType::MulticlassClassification => (act == Activation::Softmax, "softmax"),
        TaskType::BinaryClassification => match strictness {
            BinaryOutputStrictness::Strict => (act == Activation::Sigmoid, "sigmoid"),
            BinaryOutputStrictness::Lenient => (
                act == Activation::Sigmoid || (act == Activation::Softmax && units == Some(2)),
                "sigmoid (or softmax over 2 units)",
            ),
        },
    };
    if ok {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        catalog::OUTPUT_ACTIVATION,
        Severity::Error,
        Locus::Layer { index },
        format!(
            "output activation is {} but {} needs {wanted}",
            act.as_str(),
            data_interface.task_type.as_str()
        ),
        evidence! {
            "activation" => act.as_str(),
            "expected" => wanted,
            "task_type" => data_interface.task_type.as_str(),
        },
    )?])
}

/// Error for a non-positive or non-finite learning rate, warning outside
/// `[lr_min, lr_max)`.
pub fn check_learning_rate(spec: &ModelSpec, config: &ModelStageConfig) -> Result<Vec<Finding>> {
    let lr = spec.learning_rate;
    let ev = evidence! { "learning_rate" => lr, "lr_min" => config.lr_min, "lr_max" => config.lr_max };
    let (severity, message) = if !(lr > 0.0 && lr.is_finite()) {
        (Severity::Error, format!("learning rate {lr} must be a positive number"))
    } else if lr < config.lr_min || lr >= config.lr_max {
        (
            Severity::Warning,
            format!(
                "learning rate {lr} is outside the common range [{}, {})",
                config.lr_min, config.lr_max
            ),
        )
    } else {
        return Ok(Vec::new());
    };
    Ok(vec![Finding::new(catalog::LEARNING_RATE, severity, Locus::Global, message, ev)?])
}

fn expected_loss(task: TaskType) -> LossKind {
    match task {
        TaskType::Regression => LossKind::Mse,
        TaskType::BinaryClassification => LossKind::BinaryCrossentropy,
        TaskType::MulticlassClassification => LossKind::CategoricalCrossentropy,
    }
}

fn expected_metric(task: TaskType) -> MetricKind {
    match task {
        TaskType::Regression => MetricKind::Mae,
        _ => MetricKind::Accuracy,
    }
}

/// Error unless the loss matches the task.
pub fn check_loss_function(spec: &ModelSpec, data_interface: &DataInterface) -> Result<Vec<Finding>> {
    let task = data_interface.task_type;
    let expected = expected_loss(task);
    if spec.loss_kind == expected {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        catalog::LOSS_FUNCTION,
        Severity::Error,
        Locus::Global,
        format!("loss {} does not fit {}; expected {expected}", spec.loss_kind, task.as_str()),
        evidence! {
            "loss" => spec.loss_kind.as_str(),
            "expected" => expected.as_str(),
            "task_type" => task.as_str(),
        },
    )?])
}

/// Error unless every metric fits the task.
pub fn check_metrics(spec: &ModelSpec, data_interface: &DataInterface) -> Result<Vec<Finding>> {
    let task = data_interface.task_type;
    let expected = expected_metric(task);
    let mut wrong: Vec<&str> = spec
        .metrics
        .iter()
        .filter(|m| **m != expected)
        .map(|m| m.as_str())
        .collect();
    wrong.sort_unstable();
    wrong.dedup();
    if wrong.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        catalog::METRICS,
        Severity::Error,
        Locus::Global,
        format!(
            "metric(s) {} do not fit {}; expected {expected}",
            wrong.join(", "),
            task.as_str()
        ),
        evidence! {
            "metrics" => wrong.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "expected" => expected.as_str(),
            "task_type" => task.as_str(),
        },
    )?])
}

/// Losses at epochs `every, 2*every, ...` (1-based) of a per-epoch trace.
pub fn sample_trace(losses: &[f64], every: usize) -> Vec<f64> {
    if every == 0 {
        return Vec::new();
    }
    losses.iter().skip(every - 1).step_by(every).copied().collect()
}

/// Counts direction reversals in a sampled loss trace: pairs of consecutive
/// deltas with opposite signs where both exceed `amplitude_fraction` times
/// the trace mean in magnitude.
pub fn count_reversals(sampled: &[f64], amplitude_fraction: f64) -> usize {
    if sampled.len() < 3 {
        return 0;
    }
    let mean = sampled.iter().sum::<f64>() / sampled.len() as f64;
    let threshold = amplitude_fraction * mean.abs();
    sampled
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|d| {
            d[0].abs() > threshold && d[1].abs() > threshold && d[0].signum() != d[1].signum()
        })
        .count()
}

/// Targets for the user's model on mock data: the label column for
/// regression and 1-unit binary outputs, a one-hot matrix otherwise.
fn mock_targets(data: &Dataset, task: TaskType, output_units: usize) -> Result<Tensor> {
    match task {
        TaskType::Regression => Ok(data.label_tensor()),
        TaskType::BinaryClassification if output_units == 1 => Ok(data.label_tensor()),
        _ => data.one_hot(output_units),
    }
}

/// One seeded run of the dynamics analysis: trains the user's model on mock
/// data and inspects the loss and metric traces.
pub fn dynamics_run(
    spec: &ModelSpec,
    data_interface: &DataInterface,
    config: &ModelStageConfig,
    seed: u64,
) -> Result<Vec<Finding>> {
    let task = data_interface.task_type;
    let data = generate_mock_data(data_interface, &MockDataConfig::new(seed))?;
    let mut model = Model::build(spec.input_dim, spec.layers.clone(), seed)?;
    let x = data.feature_tensor();
    let y = mock_targets(&data, task, model.output_dim())?;
    let metric = spec.metrics.first().copied().unwrap_or(expected_metric(task));
    let trace = train(
        &mut model,
        &x,
        &y,
        &TrainConfig {
            loss: spec.loss_kind,
            metric,
            optimizer: spec.optimizer,
            learning_rate: spec.learning_rate,
            epochs: config.dynamics.epochs,
            batch_size: config.dynamics.batch_size,
            seed,
        },
    )?;

    let non_finite_epoch = if trace.initial_loss.is_finite() {
        trace.first_non_finite_epoch()
    } else {
        Some(0)
    };
    if let Some(epoch) = non_finite_epoch {
        let loss = if epoch == 0 { trace.initial_loss } else { trace.losses[epoch - 1] };
        return Ok(vec![Finding::new(
            catalog::MODEL_NAN_LOSS,
            Severity::Error,
            Locus::Global,
            format!("{loss} loss at epoch {epoch} on mock data"),
            evidence! { "epoch" => epoch, "loss" => loss, "seed" => seed },
        )?]);
    }

    let mut findings = Vec::new();
    let sampled = sample_trace(&trace.losses, config.dynamics.sample_every);
    let reversals = count_reversals(&sampled, config.oscillation_amplitude_fraction);
    if reversals >= config.oscillation_reversals {
        findings.push(Finding::new(
            catalog::OSCILLATING_LOSS,
            Severity::Error,
            Locus::Global,
            format!(
                "oscillating loss ({reversals} large reversals every {} epochs), reduce learning rate",
                config.dynamics.sample_every
            ),
            evidence! {
                "reversals" => reversals,
                "sampled_losses" => sampled.clone(),
                "sample_every" => config.dynamics.sample_every,
                "seed" => seed,
            },
        )?);
    }

    let initial = trace.initial_loss;
    let last = trace.final_loss();
    let reduction = if initial > 0.0 { (initial - last) / initial } else { 0.0 };
    let accuracy = if task.is_classification() {
        Some(if metric == MetricKind::Accuracy {
            trace.final_metric()
        } else {
            evaluate(&model, &x, &y, MetricKind::Accuracy)?
        })
    } else {
        None
    };
    let near_chance = accuracy
        .map(|a| a < 1.0 / data_interface.num_classes as f64 + 0.1)
        .unwrap_or(true);
    if initial > 0.0 && reduction < config.slow_convergence_fraction && near_chance {
        let mut ev = evidence! {
            "initial_loss" => initial,
            "final_loss" => last,
            "relative_reduction" => reduction,
            "epochs" => config.dynamics.epochs,
            "seed" => seed,
        };
        if let Some(a) = accuracy {
            ev.insert("accuracy".into(), number(a));
        }
        findings.push(Finding::new(
            catalog::SLOW_CONVERGENCE,
            Severity::Warning,
            Locus::Global,
            format!(
                "loss fell only {:.1}% over {} epochs",
                100.0 * reduction,
                config.dynamics.epochs
            ),
            ev,
        )?);
    }

    let first = trace.metrics[0];
    let flat = trace.metrics.iter().all(|m| *m == first);
    let perfect = metric == MetricKind::Accuracy && first == 1.0;
    if flat && !perfect {
        findings.push(Finding::new(
            catalog::MODEL_NOT_LEARNING,
            Severity::Warning,
            Locus::Global,
            format!(
                "model is not learning: {} stayed at {first} for all {} epochs",
                metric, config.dynamics.epochs
            ),
            evidence! { "metric" => metric.as_str(), "value" => first, "seed" => seed },
        )?);
    }
    Ok(findings)
}

/// Dynamics analysis over `config.runs` seeded runs (seeds `seed + i`),
/// majority voted.
pub fn check_training_dynamics(
    spec: &ModelSpec,
    data_interface: &DataInterface,
    config: &ModelStageConfig,
) -> Result<StochasticOutcome> {
    config.validate()?;
    data_interface.validate()?;
    if spec.input_dim != data_interface.num_features {
        return Err(Error::shape(
            "model input vs data interface",
            format!("{} features", data_interface.num_features),
            spec.input_dim,
        ));
    }
    run_seeded(config.runs, config.seed, |seed| dynamics_run(spec, data_interface, config, seed))
}

/// Runs the structural model checks in fixed order, then the dynamics
/// analysis unless a structural error was found.
pub fn run_model_stage(
    spec: &ModelSpec,
    data_interface: &DataInterface,
    config: &ModelStageConfig,
) -> Result<Report> {
    config.validate()?;
    spec.validate()?;
    data_interface.validate()?;
    let mut watch = Stopwatch::default();
    let mut findings = Vec::new();
    findings.extend(watch.time(MODEL_CHECKS[0], || check_input_shape(spec, data_interface))?);
    findings.extend(watch.time(MODEL_CHECKS[1], || check_output_shape(spec, data_interface))?);
    findings.extend(watch.time(MODEL_CHECKS[2], || check_hidden_activations(spec))?);
    findings.extend(watch.time(MODEL_CHECKS[3], || {
        check_output_activation(spec, data_interface, config.binary_output_strictness)
    })?);
    findings.extend(watch.time(MODEL_CHECKS[4], || check_learning_rate(spec, config))?);
    findings.extend(watch.time(MODEL_CHECKS[5], || check_loss_function(spec, data_interface))?);
    findings.extend(watch.time(MODEL_CHECKS[6], || check_metrics(spec, data_interface))?);
    let mut executed: Vec<String> = MODEL_CHECKS[..7].iter().map(|s| s.to_string()).collect();

    let mut blocking: Vec<&str> = findings
        .iter()
        .filter(|f| f.is_error())
        .map(|f| f.check_id.as_str())
        .collect();
    blocking.sort_unstable();
    blocking.dedup();
    let mut skipped = Vec::new();
    let mut runs = Vec::new();
    if blocking.is_empty() {
        let outcome = watch.time(MODEL_CHECKS[7], || {
            check_training_dynamics(spec, data_interface, config)
        })?;
        findings.extend(outcome.findings);
        runs = outcome.runs;
        executed.push(MODEL_CHECKS[7].to_string());
    } else {
        skipped.push(SkippedCheck {
            check: MODEL_CHECKS[7].to_string(),
            reason: format!("structural errors present: {}", blocking.join(", ")),
        });
    }

    sort_findings(&mut findings);
    let verdict = Verdict::of(&findings);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        stage: Stage::Model,
        interfaces: InterfaceSummary {
            data_interface: Some(data_interface.clone()),
            model_interface: None,
            dataset: None,
            model_spec: Some(spec.clone()),
        },
        config: serde_json::to_value(config)
            .map_err(|e| Error::contract(format!("config is not serializable: {e}")))?,
        executed_checks: executed,
        skipped_checks: skipped,
        findings,
        verdict,
        runs,
        timings: Some(watch.into_timings()),
    })
}
