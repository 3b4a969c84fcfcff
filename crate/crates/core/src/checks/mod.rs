//! Stage checks: data-property assertions with a mock-model learnability
//! probe, and model-design assertions with a training-dynamics probe on mock
//! data.

mod config;
mod data;
mod model;
mod runs;

pub use config::{
    BinaryOutputStrictness, DataStageConfig, DynamicsConfig, LearnabilityConfig, ModelStageConfig,
    DEFAULT_RUNS, DEFAULT_SEED,
};
pub use data::{
    check_categorical_encoding, check_class_imbalance, check_data_learnability,
    check_label_problem_match, check_missing_labels, check_missing_values, check_scaling,
    learnability_run, run_data_stage, DATA_CHECKS,
};
pub use model::{
    check_hidden_activations, check_input_shape, check_learning_rate, check_loss_function,
    check_metrics, check_output_activation, check_output_shape, check_training_dynamics,
    count_reversals, dynamics_run, run_model_stage, sample_trace, MODEL_CHECKS,
};
pub use runs::{run_seeded, StochasticOutcome};
