//! Small deterministic neural-network runtime: dense and 1-D convolution
//! layers, backpropagation, SGD and Adam, and a finite-difference gradient
//! oracle.

mod gradcheck;
mod layers;
mod loss;
mod model;
mod tensor;
mod train;

pub use gradcheck::{central_difference, finite_diff_gradients, max_relative_error, relative_error};
pub use layers::{infer_shapes, Activation, LayerDef, Shape};
pub use loss::{compute_loss, evaluate_predictions, mean_confidence, LossKind, MetricKind, PROB_EPSILON};
pub use model::Model;
pub use tensor::Tensor;
pub use train::{evaluate, train, OptimizerKind, TrainConfig, TrainTrace};
