//! Mono audio clips, WAV I/O and amplitude primitives.
//!
//! Samples are held as `f64` throughout; quantization to 16-bit PCM only
//! happens in [`write_wav`].

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

const PCM16_SCALE: f64 = 32768.0;

/// Fixed-rate mono sample sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    /// Wraps `samples`; every sample must be finite and the rate positive.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter(
                "sample rate must be positive".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// A clip of `len` zero samples.
    pub fn silent(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> AudioClip {
        AudioClip {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Root-mean-square amplitude.
pub fn rms(clip: &AudioClip) -> Result<f64> {
    if clip.is_empty() {
        return Err(Error::EmptyClip);
    }
    let power = clip.samples.iter().map(|s| s * s).sum::<f64>() / clip.len() as f64;
    Ok(power.sqrt())
}

/// Reads a mono WAV with a 16-bit integer or 32-bit float payload.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::MultiChannel {
            path: path.to_path_buf(),
            channels: spec.channels,
        });
    }
    let samples = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
            .collect::<std::result::Result<Vec<_>, _>>(),
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<Vec<_>, _>>(),
        (format, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?}"),
            })
        }
    }
    .map_err(|e| wav_error(path, e))?;
    AudioClip::new(samples, spec.sample_rate).map_err(|e| Error::MalformedWav {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

/// Writes a mono 16-bit PCM WAV. Samples are clipped to [-1, 1] first.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<()> {
    let path = path.as_ref();
    if clip.is_empty() {
        return Err(Error::EmptyClip);
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in &clip.samples {
        writer
            .write_sample(quantize_pcm16(s))
            .map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

pub(crate) fn quantize_pcm16(sample: f64) -> i16 {
    let q = (sample.clamp(-1.0, 1.0) * PCM16_SCALE).round();
    q.clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

fn wav_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(source) => Error::io(path, source),
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: "unsupported WAV feature".into(),
        },
        other => Error::MalformedWav {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    }
}
