//! Dense multilayer perceptrons: parameters, forward pass, backpropagation
//! and local training.

mod checkpoint;
mod model;
mod spec;
mod train;
mod weights;

pub use checkpoint::{decode as decode_checkpoint, encode as encode_checkpoint, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use model::{forward, loss_and_gradient, predict_proba};
pub use spec::{Activation, MlpSpec, Optimizer, TrainConfig};
pub use train::{evaluate, train_local, Evaluation};
pub use weights::{init_model, LayerShape, WeightVector};

/// Probabilities are clamped to this floor before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;
