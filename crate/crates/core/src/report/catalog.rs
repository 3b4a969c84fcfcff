use crate::error::{Error, Result};

use super::finding::Stage;

/// Version of the fix texts; texts only change with a new major version.
pub const CATALOG_VERSION: u32 = 1;

pub const MISSING_VALUES: &str = "missing_values";
pub const MISSING_LABELS: &str = "missing_labels";
pub const CLASS_IMBALANCE: &str = "class_imbalance";
pub const MISSING_ENCODING: &str = "missing_encoding";
pub const MISSING_SCALING: &str = "missing_scaling";
pub const LABEL_MISMATCH: &str = "label_mismatch";
pub const DATA_NAN_LOSS: &str = "data_nan_loss";
pub const DATA_NOT_LEARNING: &str = "data_not_learning";

pub const INPUT_SHAPE: &str = "input_shape";
pub const OUTPUT_SHAPE: &str = "output_shape";
pub const MISSING_ACTIVATION: &str = "missing_activation";
pub const OUTPUT_ACTIVATION: &str = "output_activation";
pub const LEARNING_RATE: &str = "learning_rate";
pub const LOSS_FUNCTION: &str = "loss_function";
pub const METRICS: &str = "metrics";
pub const MODEL_NAN_LOSS: &str = "model_nan_loss";
pub const OSCILLATING_LOSS: &str = "oscillating_loss";
pub const SLOW_CONVERGENCE: &str = "slow_convergence";
pub const MODEL_NOT_LEARNING: &str = "model_not_learning";

/// One catalog entry: a finding id, the stage that emits it, and its fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub check_id: &'static str,
    pub stage: Stage,
    pub fix: &'static str,
}

const fn entry(check_id: &'static str, stage: Stage, fix: &'static str) -> CatalogEntry {
    CatalogEntry { check_id, stage, fix }
}

/// The closed set of finding ids, in stage order.
pub const CATALOG: [CatalogEntry; 19] = [
    entry(
        MISSING_VALUES,
        Stage::Data,
        "remove or replace (impute) missing values before training",
    ),
    entry(
        MISSING_LABELS,
        Stage::Data,
        "drop rows without a label or recover the missing labels",
    ),
    entry(
        CLASS_IMBALANCE,
        Stage::Data,
        "rebalance the classes (resampling or class weights) before training",
    ),
    entry(
        MISSING_ENCODING,
        Stage::Data,
        "encode categorical column (one-hot or ordinal) before training",
    ),
    entry(
        MISSING_SCALING,
        Stage::Data,
        "standardize or min-max normalize the feature columns",
    ),
    entry(
        LABEL_MISMATCH,
        Stage::Data,
        "make the labels match the problem definition (class ids 0..C-1 for classification, numbers for regression) or fix the data interface",
    ),
    entry(
        DATA_NAN_LOSS,
        Stage::Data,
        "remove non-finite values from features and labels; a simple model produced NaN/Inf loss on this data",
    ),
    entry(
        DATA_NOT_LEARNING,
        Stage::Data,
        "refine the training data: check that labels align with features, remove outliers and uninformative features",
    ),
    entry(
        INPUT_SHAPE,
        Stage::Model,
        "set the input layer to the number of features and make consecutive layer shapes compatible (flatten before dense)",
    ),
    entry(
        OUTPUT_SHAPE,
        Stage::Model,
        "use 1 output unit for regression, 1 or 2 for binary classification, and one per class for multiclass classification",
    ),
    entry(
        MISSING_ACTIVATION,
        Stage::Model,
        "add a non-linear activation (e.g. relu) to every hidden layer",
    ),
    entry(
        OUTPUT_ACTIVATION,
        Stage::Model,
        "use linear output for regression, sigmoid for binary classification, and softmax for multiclass classification",
    ),
    entry(
        LEARNING_RATE,
        Stage::Model,
        "choose a positive learning rate in the common range (e.g. 0.001 for adam)",
    ),
    entry(
        LOSS_FUNCTION,
        Stage::Model,
        "use mse for regression, binary_crossentropy for binary and categorical_crossentropy for multiclass classification",
    ),
    entry(
        METRICS,
        Stage::Model,
        "use mae for regression and accuracy for classification",
    ),
    entry(
        MODEL_NAN_LOSS,
        Stage::Model,
        "reduce the learning rate, check activations and loss for numerical instability",
    ),
    entry(
        OSCILLATING_LOSS,
        Stage::Model,
        "reduce the learning rate or decrease batch size",
    ),
    entry(
        SLOW_CONVERGENCE,
        Stage::Model,
        "increase the learning rate or switch to an adaptive optimizer such as adam",
    ),
    entry(
        MODEL_NOT_LEARNING,
        Stage::Model,
        "check the learning rate, activations and weight initialization; the metric did not change during training",
    ),
];

pub fn catalog_entry(check_id: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.check_id == check_id)
        .ok_or_else(|| Error::contract(format!("unknown check id '{check_id}'")))
}

/// Actionable fix text for a finding id.
pub fn fix_for(check_id: &str) -> Result<&'static str> {
    catalog_entry(check_id).map(|e| e.fix)
}
