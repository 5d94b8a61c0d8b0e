use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::StftConfig;
use crate::embedder::EmbedderConfig;
use crate::error::{Error, Result};
use crate::inference::{KnnConfig, Weighting, DEFAULT_ZERO_FLOOR_DB};
use crate::metrics::DEFAULT_FFT_SIZE;
use crate::synth::{DatasetConfig, GeneratorSimulator};
use crate::viz::TsneConfig;

/// KNN regression settings. With `k` unset the elbow-selected value is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnSettings {
    pub k: Option<usize>,
    /// Upper end of the elbow sweep, capped at the reference count.
    pub k_max: usize,
    pub zero_floor_db: f64,
}

impl Default for KnnSettings {
    fn default() -> Self {
        Self {
            k: None,
            k_max: 1000,
            zero_floor_db: DEFAULT_ZERO_FLOOR_DB,
        }
    }
}

impl KnnSettings {
    pub fn config(&self, k: usize, weighting: Weighting) -> KnnConfig {
        KnnConfig {
            k,
            weighting,
            zero_floor_db: self.zero_floor_db,
        }
    }
}

/// Where candidate samples come from: a directory of WAVs with one
/// `<level tag>/` subdirectory per grid level, or the built-in simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceConfig {
    pub dir: Option<PathBuf>,
    pub simulator: GeneratorSimulator,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            dir: None,
            simulator: GeneratorSimulator {
                count: 200,
                ..Default::default()
            },
        }
    }
}

/// Everything a run depends on; serialised verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub embedder: EmbedderConfig,
    pub stft: StftConfig,
    pub n_fft: usize,
    pub knn: KnnSettings,
    pub tsne: TsneConfig,
    /// Points per label fed to each projection.
    pub tsne_per_label: usize,
    /// Validation loss at which each per-level network stops training.
    pub per_snr_target_loss: Option<f64>,
    pub source: SourceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            embedder: EmbedderConfig::default(),
            stft: StftConfig::default(),
            n_fft: DEFAULT_FFT_SIZE,
            knn: KnnSettings::default(),
            tsne: TsneConfig::default(),
            tsne_per_label: 200,
            per_snr_target_loss: Some(0.12),
            source: SourceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
