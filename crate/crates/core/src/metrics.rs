//! Frequency-spectrum and pixel-intensity scoring of candidate samples
//! against averaged whistle and noise references.
//!
//! A sample scores 1 when its correlation with the whistle reference is at
//! least its correlation with the noise reference, else 0. Ties score 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::dsp::{
    average_pid, average_spectrum, fft_magnitude, pearson, pixel_intensity_distribution,
    stft_spectrogram, FrequencySpectrum, PixelIntensityDistribution, StftConfig,
};
use crate::error::{Error, Result};
use crate::label::SnrLabel;

/// Default transform size: a one-second 32 kHz clip, zero-padded.
pub const DEFAULT_FFT_SIZE: usize = 32768;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Frequency,
    Pixels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePair<T> {
    pub whistle: T,
    pub noise: T,
}

/// Averaged references plus the transform configuration they were built
/// with; samples are scored under the same configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum References {
    Frequency {
        refs: ReferencePair<FrequencySpectrum>,
        n_fft: usize,
    },
    Pixels {
        refs: ReferencePair<PixelIntensityDistribution>,
        stft: StftConfig,
    },
}

impl References {
    pub fn frequency(whistles: &[AudioClip], noise: &[AudioClip], n_fft: usize) -> Result<Self> {
        Ok(References::Frequency {
            refs: ReferencePair {
                whistle: average_spectrum(whistles, n_fft)?,
                noise: average_spectrum(noise, n_fft)?,
            },
            n_fft,
        })
    }

    pub fn pixels(whistles: &[AudioClip], noise: &[AudioClip], stft: StftConfig) -> Result<Self> {
        let pids = |clips: &[AudioClip]| -> Result<PixelIntensityDistribution> {
            let each = clips
                .par_iter()
                .map(|c| pixel_intensity_distribution(&stft_spectrogram(c, &stft)?))
                .collect::<Result<Vec<_>>>()?;
            average_pid(&each)
        };
        Ok(References::Pixels {
            refs: ReferencePair {
                whistle: pids(whistles)?,
                noise: pids(noise)?,
            },
            stft,
        })
    }

    pub fn build(
        method: Method,
        whistles: &[AudioClip],
        noise: &[AudioClip],
        n_fft: usize,
        stft: StftConfig,
    ) -> Result<Self> {
        match method {
            Method::Frequency => Self::frequency(whistles, noise, n_fft),
            Method::Pixels => Self::pixels(whistles, noise, stft),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            References::Frequency { .. } => Method::Frequency,
            References::Pixels { .. } => Method::Pixels,
        }
    }

    /// The same references with whistle and noise exchanged.
    pub fn swapped(&self) -> Self {
        match self.clone() {
            References::Frequency { refs, n_fft } => References::Frequency {
                refs: ReferencePair {
                    whistle: refs.noise,
                    noise: refs.whistle,
                },
                n_fft,
            },
            References::Pixels { refs, stft } => References::Pixels {
                refs: ReferencePair {
                    whistle: refs.noise,
                    noise: refs.whistle,
                },
                stft,
            },
        }
    }

    pub fn score(&self, sample: &AudioClip) -> Result<SampleScore> {
        match self {
            References::Frequency { refs, n_fft } => score_sample_frequency(sample, refs, *n_fft),
            References::Pixels { refs, stft } => score_sample_pixels(sample, refs, stft),
        }
    }
}

/// Binary score with both correlations kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub score: u8,
    pub c_whistle: f64,
    pub c_noise: f64,
}

impl SampleScore {
    pub fn from_correlations(c_whistle: f64, c_noise: f64) -> Self {
        SampleScore {
            score: u8::from(c_whistle >= c_noise),
            c_whistle,
            c_noise,
        }
    }
}

pub fn score_sample_frequency(
    sample: &AudioClip,
    refs: &ReferencePair<FrequencySpectrum>,
    n_fft: usize,
) -> Result<SampleScore> {
    let spec = fft_magnitude(sample, n_fft)?;
    if spec.magnitudes.len() != refs.whistle.magnitudes.len() {
        return Err(Error::Mismatch(
            "sample spectrum and references differ in size".into(),
        ));
    }
    Ok(SampleScore::from_correlations(
        pearson(&spec.magnitudes, &refs.whistle.magnitudes)?,
        pearson(&spec.magnitudes, &refs.noise.magnitudes)?,
    ))
}

pub fn score_sample_pixels(
    sample: &AudioClip,
    refs: &ReferencePair<PixelIntensityDistribution>,
    stft: &StftConfig,
) -> Result<SampleScore> {
    let pid = pixel_intensity_distribution(&stft_spectrogram(sample, stft)?)?;
    Ok(SampleScore::from_correlations(
        pearson(&pid.weights, &refs.whistle.weights)?,
        pearson(&pid.weights, &refs.noise.weights)?,
    ))
}

/// Mean binary score for one SNR level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrScore {
    pub snr: SnrLabel,
    pub mean_score: f64,
    pub n_samples: usize,
    pub samples: Vec<SampleScore>,
}

pub fn mean_score(scores: &[u8]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to average"));
    }
    let hits: u64 = scores.iter().map(|&s| u64::from(s)).sum();
    Ok(hits as f64 / scores.len() as f64)
}

/// Scores every sample (in parallel) and averages in input order.
pub fn evaluate_snr_level(
    snr: SnrLabel,
    samples: &[AudioClip],
    refs: &References,
) -> Result<SnrScore> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples for this SNR level"));
    }
    let scored = samples
        .par_iter()
        .map(|s| refs.score(s))
        .collect::<Result<Vec<_>>>()?;
    let binary: Vec<u8> = scored.iter().map(|s| s.score).collect();
    Ok(SnrScore {
        snr,
        mean_score: mean_score(&binary)?,
        n_samples: scored.len(),
        samples: scored,
    })
}
