//! From-scratch regressors: a multilayer perceptron trained with SGD.

mod checkpoint;
mod model;
mod train;

pub use checkpoint::{
    config_echo_path, load_checkpoint, save_checkpoint, CheckpointInfo, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use model::{gradient_check, to_f64_rows, Gradients, MlpModel, Trace};
pub use train::{
    evaluate_mse, predict, prediction_set, train, train_on_dataset, write_predictions, EpochStats,
    Examples, TrainConfig, TrainReport, DEFAULT_HIDDEN,
};
