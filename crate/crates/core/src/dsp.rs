//! Spectral primitives: magnitude spectra, greyscale STFT spectrograms,
//! pixel-intensity distributions and Pearson correlation.

use std::fs;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// One-sided DFT magnitudes, bins `0..=n/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    pub magnitudes: Vec<f64>,
    pub bin_width: f64,
}

/// Magnitude of the real-input DFT of the first `n` samples, zero-padded
/// when the clip is shorter.
pub fn fft_magnitude(clip: &AudioClip, n: usize) -> Result<FrequencySpectrum> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut buf: Vec<Complex<f64>> = clip
        .samples()
        .iter()
        .take(n)
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(FrequencySpectrum {
        magnitudes: buf[..=n / 2].iter().map(|c| c.norm()).collect(),
        bin_width: clip.sample_rate() as f64 / n as f64,
    })
}

/// Element-wise mean of the clips' magnitude spectra.
pub fn average_spectrum(clips: &[AudioClip], n: usize) -> Result<FrequencySpectrum> {
    let Some(first) = clips.first() else {
        return Err(Error::EmptyInput(
            "average_spectrum needs at least one clip",
        ));
    };
    let mut sum = vec![0.0; n / 2 + 1];
    let mut bin_width = 0.0;
    for clip in clips {
        if clip.sample_rate() != first.sample_rate() {
            return Err(Error::Mismatch("clips have different sample rates".into()));
        }
        let spec = fft_magnitude(clip, n)?;
        for (acc, m) in sum.iter_mut().zip(&spec.magnitudes) {
            *acc += m;
        }
        bin_width = spec.bin_width;
    }
    let k = clips.len() as f64;
    Ok(FrequencySpectrum {
        magnitudes: sum.into_iter().map(|v| v / k).collect(),
        bin_width,
    })
}

/// Product-moment correlation of two equal-length sequences.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "pearson over {} and {} values",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(
            "pearson needs at least two values".into(),
        ));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Spectrogram settings: Hann window length, hop, and the dynamic range in
/// dB below the per-image maximum that maps to black.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub window: usize,
    pub hop: usize,
    pub floor_db: f64,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window: 1024,
            hop: 256,
            floor_db: 80.0,
        }
    }
}

/// An 8-bit greyscale image, row-major with `rows` frequency bins (row 0 =
/// DC) and `cols` time frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreySpectrogram {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl GreySpectrogram {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows * cols != pixels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} image with {} pixels",
                pixels.len()
            )));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.cols + col]
    }

    /// Bilinear resize, rounded back to 8 bits.
    ///
    /// Enlarging interpolates between corner-aligned samples. Shrinking
    /// widens the triangle kernel by the scale factor so every source pixel
    /// contributes; plain two-tap sampling would skip most spectrogram bins
    /// and drop narrow tonal tracks.
    pub fn resized(&self, rows: usize, cols: usize) -> GreySpectrogram {
        let wy = bilinear_taps(self.rows, rows);
        let wx = bilinear_taps(self.cols, cols);
        let mut horizontal = vec![0.0; self.rows * cols];
        for r in 0..self.rows {
            let src = &self.pixels[r * self.cols..(r + 1) * self.cols];
            for (c, taps) in wx.iter().enumerate() {
                horizontal[r * cols + c] = taps.iter().map(|&(i, w)| src[i] as f64 * w).sum();
            }
        }
        let mut pixels = Vec::with_capacity(rows * cols);
        for taps in &wy {
            for c in 0..cols {
                let v: f64 = taps
                    .iter()
                    .map(|&(i, w)| horizontal[i * cols + c] * w)
                    .sum();
                pixels.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
        GreySpectrogram { rows, cols, pixels }
    }

    /// Writes a binary PGM (P5), low frequencies at the bottom.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        for r in (0..self.rows).rev() {
            bytes.extend_from_slice(&self.pixels[r * self.cols..(r + 1) * self.cols]);
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&bytes))
            .map_err(|e| Error::io(path, e))
    }
}

/// Normalized `(source index, weight)` taps for each of `dst` outputs.
fn bilinear_taps(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    if dst >= src {
        let step = if dst > 1 {
            (src as f64 - 1.0) / (dst as f64 - 1.0)
        } else {
            0.0
        };
        return (0..dst)
            .map(|i| {
                let x = i as f64 * step;
                let x0 = x.floor() as usize;
                let x1 = (x0 + 1).min(src - 1);
                let f = x - x0 as f64;
                if x1 == x0 || f == 0.0 {
                    vec![(x0, 1.0)]
                } else {
                    vec![(x0, 1.0 - f), (x1, f)]
                }
            })
            .collect();
    }
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let centre = (i as f64 + 0.5) * scale - 0.5;
            let lo = (centre - scale).floor().max(0.0) as usize;
            let hi = ((centre + scale).ceil() as usize).min(src - 1);
            let mut taps: Vec<(usize, f64)> = (lo..=hi)
                .map(|j| (j, 1.0 - (j as f64 - centre).abs() / scale))
                .filter(|&(_, w)| w > 0.0)
                .collect();
            let total: f64 = taps.iter().map(|t| t.1).sum();
            taps.iter_mut().for_each(|t| t.1 /= total);
            taps
        })
        .collect()
}

fn hann(window: usize) -> Vec<f64> {
    (0..window)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / window as f64).cos())
        .collect()
}

/// Hann-windowed STFT magnitudes, one `Vec` of `window/2 + 1` bins per frame.
pub fn stft_magnitudes(
    samples: &[f64],
    window: usize,
    hop: usize,
) -> Result<(Vec<Vec<f64>>, usize)> {
    if window == 0 || !window.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(window));
    }
    if hop == 0 || hop > window {
        return Err(Error::InvalidParameter(format!(
            "hop {hop} must be in 1..={window}"
        )));
    }
    if samples.len() < window {
        return Err(Error::ClipTooShort {
            len: samples.len(),
            window,
        });
    }
    let frames = (samples.len() - window) / hop + 1;
    let bins = window / 2 + 1;
    let taper = hann(window);
    let fft = FftPlanner::new().plan_fft_forward(window);
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f * hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(samples[start + i] * taper[i], 0.0);
        }
        fft.process(&mut buf);
        out.push(buf[..bins].iter().map(|c| c.norm()).collect());
    }
    Ok((out, bins))
}

/// Greyscale spectrogram: STFT magnitudes in dB, floored at `floor_db` below
/// the image maximum, mapped linearly onto 0..=255.
pub fn stft_spectrogram(clip: &AudioClip, cfg: &StftConfig) -> Result<GreySpectrogram> {
    if !(cfg.floor_db > 0.0) {
        return Err(Error::InvalidParameter("floor_db must be positive".into()));
    }
    let (frames, bins) = stft_magnitudes(clip.samples(), cfg.window, cfg.hop)?;
    let cols = frames.len();
    let max = frames
        .iter()
        .flat_map(|f| f.iter())
        .fold(0.0f64, |m, &v| m.max(v));
    let mut pixels = vec![0u8; bins * cols];
    if max > 0.0 {
        let top_db = 20.0 * max.log10();
        let floor = top_db - cfg.floor_db;
        for (c, frame) in frames.iter().enumerate() {
            for (r, &mag) in frame.iter().enumerate() {
                let db = if mag > 0.0 {
                    20.0 * mag.log10()
                } else {
                    f64::NEG_INFINITY
                };
                let level = ((db - floor) / cfg.floor_db).clamp(0.0, 1.0);
                pixels[r * cols + c] = (level * 255.0).round() as u8;
            }
        }
    }
    GreySpectrogram::new(bins, cols, pixels)
}

/// Normalized 256-bin histogram of pixel values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelIntensityDistribution {
    pub weights: Vec<f64>,
}

pub fn pixel_intensity_distribution(img: &GreySpectrogram) -> Result<PixelIntensityDistribution> {
    if img.pixels.is_empty() {
        return Err(Error::EmptyInput("image has no pixels"));
    }
    let mut counts = [0u64; 256];
    for &p in &img.pixels {
        counts[p as usize] += 1;
    }
    let total = img.pixels.len() as f64;
    Ok(PixelIntensityDistribution {
        weights: counts.iter().map(|&c| c as f64 / total).collect(),
    })
}

/// Element-wise mean of several distributions.
pub fn average_pid(pids: &[PixelIntensityDistribution]) -> Result<PixelIntensityDistribution> {
    if pids.is_empty() {
        return Err(Error::EmptyInput(
            "average_pid needs at least one distribution",
        ));
    }
    let mut weights = vec![0.0; 256];
    for pid in pids {
        for (w, v) in weights.iter_mut().zip(&pid.weights) {
            *w += v;
        }
    }
    let k = pids.len() as f64;
    weights.iter_mut().for_each(|w| *w /= k);
    Ok(PixelIntensityDistribution { weights })
}
