use std::path::Path;

use rayon::prelude::*;

use crate::audio::{read_wav, AudioClip};
use crate::dsp::{stft_spectrogram, StftConfig};
use crate::embedder::network_input;
use crate::error::{Error, Result};
use crate::label::SnrLabel;
use crate::synth::{load_dataset_config, DatasetConfig, DatasetManifest, Split};

/// A built dataset: its manifest and the configuration it was built from.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub config: DatasetConfig,
}

impl Dataset {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        Ok(Self {
            manifest: DatasetManifest::load(root)?,
            config: load_dataset_config(root)?,
        })
    }

    pub fn levels(&self) -> Vec<SnrLabel> {
        self.manifest
            .grid
            .iter()
            .map(|&db| SnrLabel::Decibel(db))
            .collect()
    }

    /// Clips of one class and split, in manifest order.
    pub fn clips(&self, label: SnrLabel, split: Split) -> Result<Vec<AudioClip>> {
        let entries: Vec<_> = self.manifest.select(label, split).collect();
        if entries.is_empty() {
            return Err(Error::EmptyInput(
                "dataset has no clips for this class and split",
            ));
        }
        entries
            .par_iter()
            .map(|e| read_wav(self.manifest.resolve(e)))
            .collect()
    }

    pub fn digest(&self) -> Result<String> {
        self.manifest.digest()
    }
}

/// Greyscale spectrograms resized to `shape` and scaled to [0, 1].
pub fn prepare_inputs(
    clips: &[AudioClip],
    stft: &StftConfig,
    shape: (usize, usize),
) -> Result<Vec<Vec<f64>>> {
    clips
        .par_iter()
        .map(|c| {
            Ok(network_input(
                &stft_spectrogram(c, stft)?.resized(shape.0, shape.1),
            ))
        })
        .collect()
}
