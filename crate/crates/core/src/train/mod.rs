//! Balanced mask sampling, masked BCE, Adam, the pretraining loop and
//! checkpoint persistence.

mod adam;
mod checkpoint;
mod config;
mod loss;
mod mask;
mod pretrain;

pub use adam::{adam_step, OptimizerState};
pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint, Checkpoint, EpochRecord,
    TrainingMeta, CHECKPOINT_VERSION,
};
pub use config::TrainConfig;
pub use loss::{masked_bce, MaskedLoss, PROB_CLAMP};
pub use mask::{sample_mask, ChannelMask, MaskTensor};
pub use pretrain::{
    evaluation_mask, graph_gradient, prepare_samples, pretrain, pretrain_with_progress, training_mask, Sample,
    TrainOutcome,
};
