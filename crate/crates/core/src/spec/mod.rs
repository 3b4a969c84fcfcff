//! Input documents: the data and model interfaces, the model spec, and CSV
//! datasets with per-column profiles.

mod dataset;
mod interfaces;
mod model_spec;
mod profile;

pub use dataset::{load_dataset, read_dataset, Dataset, LabelColumn};
pub use interfaces::{
    parse_data_interface, parse_model_interface, ArchitectureType, DataInterface, DataKind,
    ModelInterface, TaskType,
};
pub use model_spec::{parse_model_spec, ModelSpec};
pub use profile::{
    classify_column, infer_column_profile, is_missing_token, profile_numeric, ColumnProfile,
    MISSING_TOKENS, NUMERIC_SHARE,
};
