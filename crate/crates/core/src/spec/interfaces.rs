use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Numeric,
    Categorical,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Regression,
    BinaryClassification,
    MulticlassClassification,
}

impl TaskType {
    pub const ALL: [TaskType; 3] = [
        TaskType::Regression,
        TaskType::BinaryClassification,
        TaskType::MulticlassClassification,
    ];

    pub fn is_classification(self) -> bool {
        !matches!(self, TaskType::Regression)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::Regression => "regression",
            TaskType::BinaryClassification => "binary_classification",
            TaskType::MulticlassClassification => "multiclass_classification",
        }
    }

    /// Checks the task/class-count pairing.
    pub fn check_classes(self, num_classes: usize) -> Result<()> {
        let ok = match self {
            TaskType::Regression => num_classes == 1,
            TaskType::BinaryClassification => num_classes == 2,
            TaskType::MulticlassClassification => num_classes > 2,
        };
        if ok {
            return Ok(());
        }
        let rule = match self {
            TaskType::Regression => "regression requires num_classes == 1",
            TaskType::BinaryClassification => "binary_classification requires num_classes == 2",
            TaskType::MulticlassClassification => {
                "multiclass_classification requires num_classes > 2"
            }
        };
        Err(Error::contract(format!("{rule}, got {num_classes}")))
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArchitectureType {
    #[serde(rename = "FCNN")]
    Fcnn,
    #[serde(rename = "CNN")]
    Cnn,
}

impl ArchitectureType {
    pub const ALL: [ArchitectureType; 2] = [ArchitectureType::Fcnn, ArchitectureType::Cnn];
}

impl fmt::Display for ArchitectureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchitectureType::Fcnn => "FCNN",
            ArchitectureType::Cnn => "CNN",
        })
    }
}

/// What the data-preparation stage promises to deliver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataInterface {
    pub num_features: usize,
    pub data_kind: DataKind,
    pub task_type: TaskType,
    pub num_classes: usize,
}

impl DataInterface {
    pub fn validate(&self) -> Result<()> {
        if self.num_features == 0 {
            return Err(Error::contract("num_features must be positive"));
        }
        self.task_type.check_classes(self.num_classes)
    }
}

/// What the model-design stage promises to deliver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelInterface {
    pub architecture_type: ArchitectureType,
    pub task_type: TaskType,
}

pub fn parse_data_interface(text: &str) -> Result<DataInterface> {
    let di: DataInterface = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("data interface: {e}")))?;
    di.validate()?;
    Ok(di)
}

pub fn parse_model_interface(text: &str) -> Result<ModelInterface> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("model interface: {e}")))
}
