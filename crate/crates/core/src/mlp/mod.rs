//! Dense feed-forward binary classifier trained by backpropagation.
//!
//! The default network maps a concatenated pair of Schmidt vectors
//! (`2·dim` inputs) through two ReLU layers of 200 and 100 units into one
//! sigmoid unit, trained on binary cross-entropy.

mod checkpoint;
mod encode;
mod model;
mod optim;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, TrainingProvenance};
pub use encode::{balance, encode_dataset, encode_row, encode_rows, Samples};
pub use model::{
    loss, sigmoid, Activation, Dense, Gradients, LayerSpec, MlpModel, HIDDEN_WIDTHS, PROB_CLAMP,
};
pub use optim::{optimizer_step, Hyperparams, OptimizerKind, OptimizerState};
pub use train::{
    evaluate, predict_labels, train, Confusion, EpochStats, Metrics, TrainConfig, TrainOutcome,
    DECISION_THRESHOLD,
};
