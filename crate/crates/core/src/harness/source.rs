use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::SourceConfig;
use crate::audio::{read_wav, write_wav, AudioClip};
use crate::error::{Error, Result};
use crate::label::SnrLabel;
use crate::synth::{simulate_generator, wav_files, GeneratorSimulator, SynthSettings};

/// A generator under test.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSource {
    /// `<dir>/<level tag>/*.wav`, e.g. `samples/snr_10dB/000.wav`.
    WavDirectory(PathBuf),
    Simulator(GeneratorSimulator),
}

impl SampleSource {
    pub fn from_config(cfg: &SourceConfig) -> Self {
        match &cfg.dir {
            Some(dir) => SampleSource::WavDirectory(dir.clone()),
            None => SampleSource::Simulator(cfg.simulator.clone()),
        }
    }

    /// Candidate clips for `level`, validated against the dataset's sample
    /// rate and clip length.
    pub fn clips(&self, level: SnrLabel, settings: &SynthSettings) -> Result<Vec<AudioClip>> {
        match self {
            SampleSource::Simulator(sim) => simulate_generator(sim, level, settings),
            SampleSource::WavDirectory(root) => {
                let dir = root.join(level.tag());
                if !dir.is_dir() {
                    return Err(Error::EmptyInput(
                        "sample source has no clips for this level",
                    ));
                }
                let files = wav_files(&dir)?;
                if files.is_empty() {
                    return Err(Error::EmptyInput("sample source directory is empty"));
                }
                let expected = settings.clip_samples();
                files
                    .par_iter()
                    .map(|path| {
                        let clip = read_wav(path)?;
                        if clip.sample_rate() != settings.sample_rate || clip.len() != expected {
                            return Err(Error::Mismatch(format!(
                                "{}: {} samples at {} Hz, expected {expected} at {} Hz",
                                path.display(),
                                clip.len(),
                                clip.sample_rate(),
                                settings.sample_rate
                            )));
                        }
                        Ok(clip)
                    })
                    .collect()
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SampleSource::WavDirectory(dir) => format!("wav_directory:{}", dir.display()),
            SampleSource::Simulator(sim) => format!(
                "simulator:bias={}dB,quality={:?},count={},seed={}",
                sim.bias_db, sim.quality, sim.count, sim.seed
            ),
        }
    }
}

/// Writes simulator output in the layout [`SampleSource::WavDirectory`]
/// reads, one subdirectory per level.
pub fn export_simulated(
    sim: &GeneratorSimulator,
    levels: &[SnrLabel],
    settings: &SynthSettings,
    out_dir: impl AsRef<Path>,
) -> Result<()> {
    let out_dir = out_dir.as_ref();
    for &level in levels {
        let dir = out_dir.join(level.tag());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let clips = simulate_generator(sim, level, settings)?;
        clips
            .par_iter()
            .enumerate()
            .map(|(i, clip)| write_wav(dir.join(format!("{i:06}.wav")), clip))
            .collect::<Result<Vec<()>>>()?;
    }
    Ok(())
}
