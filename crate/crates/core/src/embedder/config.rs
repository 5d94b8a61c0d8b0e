use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderConfig {
    pub conv_blocks: usize,
    pub dense_layers: usize,
    /// Width of every dense layer before the embedding layer.
    pub hidden_width: usize,
    pub embedding_dim: usize,
    /// Channels of the first convolution block; doubled per block.
    pub base_channels: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// `(rows, cols)` of the resized spectrogram fed to the network.
    pub input_shape: (usize, usize),
    /// Stop once the epoch validation loss falls to this value.
    pub target_val_loss: Option<f64>,
}

impl Default for EmbedderConfig {
    /// Desk-scale configuration.
    fn default() -> Self {
        Self {
            conv_blocks: 3,
            dense_layers: 1,
            hidden_width: 64,
            embedding_dim: 16,
            base_channels: 8,
            learning_rate: 2e-4,
            margin: 0.2,
            batch_size: 32,
            epochs: 30,
            seed: 0,
            input_shape: (128, 128),
            target_val_loss: None,
        }
    }
}

impl EmbedderConfig {
    /// The seven-block, two-dense-layer, 56-dimensional reference network.
    pub fn reference() -> Self {
        Self {
            conv_blocks: 7,
            dense_layers: 2,
            embedding_dim: 56,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.embedding_dim < 2 {
            return bad("embedding_dim must be at least 2");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.margin > 0.0) {
            return bad("margin must be positive");
        }
        if self.dense_layers == 0 {
            return bad("at least one dense layer is required");
        }
        if self.base_channels == 0 || self.hidden_width == 0 {
            return bad("layer widths must be positive");
        }
        if self.input_shape.0 == 0 || self.input_shape.1 == 0 {
            return bad("input shape must be non-empty");
        }
        let (rows, cols) = self.input_shape;
        if self.conv_blocks >= usize::BITS as usize
            || rows >> self.conv_blocks == 0
            || cols >> self.conv_blocks == 0
        {
            return Err(Error::SpatialCollapse {
                rows,
                cols,
                blocks: self.conv_blocks,
            });
        }
        Ok(())
    }
}
