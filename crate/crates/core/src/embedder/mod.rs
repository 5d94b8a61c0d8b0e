//! Convolutional embedding network trained with semi-hard triplet loss.
//!
//! The network is a stack of `3×3`, stride-2 convolution blocks (channels
//! doubling from 8, ReLU) followed by a dense head whose output is
//! L2-normalized. Gradients are computed by hand in double precision.

mod adam;
mod checkpoint;
mod config;
mod mining;
mod network;
mod search;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::EmbedderConfig;
pub use mining::{semi_hard_triplets, Triplet};
pub use network::{network_input, EmbedderNetwork, Embedding, ForwardTrace, LayerShape};
pub use search::{hyper_search, SearchOutcome, SearchSpace, Trial};
pub use train::{
    batch_triplet_loss, train, triplet_loss, write_loss_history, BatchSampler, EpochLoss,
    LabeledInputs, TrainOutcome,
};
