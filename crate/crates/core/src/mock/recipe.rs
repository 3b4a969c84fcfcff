use serde::{Deserialize, Serialize};

use crate::engine::{Activation, LayerDef, LossKind, MetricKind, Model, OptimizerKind};
use crate::error::{Error, Result};
use crate::spec::{ArchitectureType, ModelInterface, ModelSpec, TaskType};

/// Filters in the mock CNN's convolution layer.
pub const CNN_FILTERS: usize = 8;
/// Kernel width of the mock CNN's convolution layer.
pub const CNN_KERNEL: usize = 3;

/// Hyperparameters of a mock model, as selected by the decision table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockModelRecipe {
    pub architecture_type: ArchitectureType,
    pub hidden_units: usize,
    pub output_units: usize,
    pub output_activation: Activation,
    pub loss_kind: LossKind,
    pub metric_kind: MetricKind,
}

/// Decision-table lookup: (problem type, model type, classes) to mock model
/// actions.
///
/// | condition  | output units | output activation | loss                      | metric   |
/// |------------|--------------|-------------------|---------------------------|----------|
/// | regression | 1            | linear            | mse                       | mae      |
/// | binary     | 2            | sigmoid           | binary_crossentropy       | accuracy |
/// | multiclass | classes      | softmax           | categorical_crossentropy  | accuracy |
///
/// Every column uses one hidden layer with as many neurons as features.
pub fn mock_model_recipe(
    model_interface: &ModelInterface,
    num_features: usize,
    num_classes: usize,
) -> Result<MockModelRecipe> {
    if num_features == 0 {
        return Err(Error::contract("num_features must be positive"));
    }
    let task = model_interface.task_type;
    task.check_classes(num_classes)?;
    let (output_units, output_activation, loss_kind, metric_kind) = match task {
        TaskType::Regression => (1, Activation::Linear, LossKind::Mse, MetricKind::Mae),
        TaskType::BinaryClassification => (
            2,
            Activation::Sigmoid,
            LossKind::BinaryCrossentropy,
            MetricKind::Accuracy,
        ),
        TaskType::MulticlassClassification => (
            num_classes,
            Activation::Softmax,
            LossKind::CategoricalCrossentropy,
            MetricKind::Accuracy,
        ),
    };
    Ok(MockModelRecipe {
        architecture_type: model_interface.architecture_type,
        hidden_units: num_features,
        output_units,
        output_activation,
        loss_kind,
        metric_kind,
    })
}

/// Layer stack of the three-layer mock (input, one hidden layer, output).
pub fn mock_layers(recipe: &MockModelRecipe, num_features: usize) -> Result<Vec<LayerDef>> {
    let output = LayerDef::dense(recipe.output_units, recipe.output_activation);
    match recipe.architecture_type {
        ArchitectureType::Fcnn => Ok(vec![
            LayerDef::dense(recipe.hidden_units, Activation::Relu),
            output,
        ]),
        ArchitectureType::Cnn => {
            if num_features < CNN_KERNEL {
                return Err(Error::contract(format!(
                    "a CNN mock needs at least {CNN_KERNEL} features for its kernel, got \
                     {num_features}; use an FCNN architecture for such narrow data"
                )));
            }
            Ok(vec![
                LayerDef::conv1d(CNN_FILTERS, CNN_KERNEL, Activation::Relu),
                LayerDef::Flatten,
                output,
            ])
        }
    }
}

pub fn build_mock_model(recipe: &MockModelRecipe, num_features: usize, seed: u64) -> Result<Model> {
    Model::build(num_features, mock_layers(recipe, num_features)?, seed)
}

/// The mock model written out as a model spec document.
pub fn mock_model_spec(
    recipe: &MockModelRecipe,
    num_features: usize,
    optimizer: OptimizerKind,
    learning_rate: f64,
) -> Result<ModelSpec> {
    Ok(ModelSpec {
        input_dim: num_features,
        layers: mock_layers(recipe, num_features)?,
        loss_kind: recipe.loss_kind,
        optimizer,
        learning_rate,
        metrics: vec![recipe.metric_kind],
    })
}
