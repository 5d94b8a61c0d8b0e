//! Whistle and noise synthesis, exact-SNR mixing, dataset builds and the
//! biased generator simulator.
//!
//! SNR is a power ratio throughout: `dB = 10·log10(linear)`. A mixture is
//! `x = s + β·n` with `β = A_s / (A_n·√SNR)`, `A` being RMS amplitude, so the
//! component power ratio of `s` to `β·n` is exactly the requested SNR.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::{read_wav, rms, write_wav, AudioClip};
use crate::error::{Error, Result};
use crate::inference::snr_db_to_linear;
use crate::label::SnrLabel;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const DATASET_CONFIG_FILE: &str = "dataset.toml";

const FADE_SECONDS: f64 = 0.010;
const PINK_LOW_CUTOFF_HZ: f64 = 50.0;
const NOISE_RMS: f64 = 0.25;

/// Deterministic per-item seed derived from a master seed and an index.
///
/// Each index selects an independent ChaCha stream, so items can be
/// generated in any order or in parallel with identical results.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// An upsweep whistle: a linear chirp from `f_start` to `f_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhistleSpec {
    pub f_start: f64,
    pub f_end: f64,
    pub onset: f64,
    pub duration: f64,
    pub amplitude: f64,
}

impl WhistleSpec {
    pub fn bandwidth(&self) -> f64 {
        self.f_end - self.f_start
    }

    /// Sweep rate in Hz per second.
    pub fn gradient(&self) -> f64 {
        self.bandwidth() / self.duration
    }

    pub fn validate(&self, clip_len: f64, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.f_start > 0.0 && self.f_start < self.f_end) {
            return Err(Error::InvalidParameter(format!(
                "whistle must sweep upward from a positive frequency ({} -> {} Hz)",
                self.f_start, self.f_end
            )));
        }
        if self.f_end > nyquist {
            return Err(Error::InvalidParameter(format!(
                "f_end {} Hz above Nyquist {} Hz",
                self.f_end, nyquist
            )));
        }
        if !(self.duration > 0.0)
            || self.onset < 0.0
            || self.onset + self.duration > clip_len + 1e-12
        {
            return Err(Error::InvalidParameter(format!(
                "whistle [{}, {}] s does not fit a {clip_len} s clip",
                self.onset,
                self.onset + self.duration
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude {} outside (0, 1]",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Ranges from which whistle parameters are drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhistleRanges {
    pub f_start: (f64, f64),
    pub bandwidth: (f64, f64),
    pub duration: (f64, f64),
    pub amplitude: f64,
}

impl Default for WhistleRanges {
    fn default() -> Self {
        Self {
            f_start: (2000.0, 5000.0),
            bandwidth: (1000.0, 3000.0),
            duration: (0.3, 0.8),
            amplitude: 0.5,
        }
    }
}

impl WhistleRanges {
    pub fn sample<R: Rng>(&self, rng: &mut R, clip_len: f64) -> WhistleSpec {
        let f_start = uniform(rng, self.f_start);
        let bandwidth = uniform(rng, self.bandwidth);
        let duration = uniform(rng, self.duration).min(clip_len);
        let onset = rng.gen::<f64>() * (clip_len - duration);
        WhistleSpec {
            f_start,
            f_end: f_start + bandwidth,
            onset,
            duration,
            amplitude: self.amplitude,
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Linear chirp with raised-cosine fades, zero outside its active region.
pub fn gen_whistle(spec: &WhistleSpec, clip_len: f64, sample_rate: u32) -> Result<AudioClip> {
    spec.validate(clip_len, sample_rate)?;
    let sr = sample_rate as f64;
    let n = (clip_len * sr).round() as usize;
    let start = (spec.onset * sr).round() as usize;
    let end = (((spec.onset + spec.duration) * sr).round() as usize).min(n);
    let active = end.saturating_sub(start);
    let fade = ((FADE_SECONDS * sr).round() as usize)
        .min(active / 2)
        .max(1);
    let sweep = (spec.f_end - spec.f_start) / spec.duration;

    let mut samples = vec![0.0; n];
    for (j, out) in samples[start..end].iter_mut().enumerate() {
        let tau = j as f64 / sr;
        let phase = 2.0 * std::f64::consts::PI * (spec.f_start * tau + 0.5 * sweep * tau * tau);
        let from_edge = j.min(active - 1 - j);
        let envelope = if from_edge < fade {
            0.5 * (1.0 - (std::f64::consts::PI * from_edge as f64 / fade as f64).cos())
        } else {
            1.0
        };
        *out = spec.amplitude * envelope * phase.sin();
    }
    AudioClip::new(samples, sample_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Pink,
    White,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pink" => Ok(NoiseKind::Pink),
            "white" => Ok(NoiseKind::White),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise kind {other:?}"
            ))),
        }
    }
}

/// Zero-mean noise, deterministic in `seed`.
///
/// Pink noise is shaped in the frequency domain to a power spectral density
/// proportional to 1/f above 50 Hz, with nothing below; its mean is exactly
/// zero. White noise is i.i.d. Gaussian. Both are scaled to RMS 0.25.
pub fn gen_noise(kind: NoiseKind, clip_len: f64, sample_rate: u32, seed: u64) -> Result<AudioClip> {
    if !(clip_len > 0.0) {
        return Err(Error::InvalidParameter(
            "clip length must be positive".into(),
        ));
    }
    let n = (clip_len * sample_rate as f64).round() as usize;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "clip shorter than two samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<f64> = match kind {
        NoiseKind::White => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
        NoiseKind::Pink => pink_samples(n, sample_rate as f64, &mut rng),
    };
    let power = samples.iter().map(|s| s * s).sum::<f64>() / n as f64;
    let gain = NOISE_RMS / power.sqrt();
    samples.iter_mut().for_each(|s| *s *= gain);
    AudioClip::new(samples, sample_rate)
}

fn pink_samples(n: usize, sample_rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bin_hz = sample_rate / n as f64;
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let f = k as f64 * bin_hz;
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        if f < PINK_LOW_CUTOFF_HZ {
            continue;
        }
        let amp = f.powf(-0.5);
        spectrum[k] = if 2 * k == n {
            Complex::new(re * amp, 0.0)
        } else {
            Complex::new(re * amp, im * amp)
        };
        if 2 * k != n {
            spectrum[n - k] = spectrum[k].conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    spectrum.into_iter().map(|c| c.re).collect()
}

/// `A_s / (A_n·√SNR)`.
pub fn compute_beta(a_s: f64, a_n: f64, snr_linear: f64) -> Result<f64> {
    if !(a_n > 0.0) {
        return Err(Error::InvalidParameter(
            "noise amplitude must be positive".into(),
        ));
    }
    if !(snr_linear > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "linear SNR must be positive, got {snr_linear}"
        )));
    }
    Ok(a_s / (a_n * snr_linear.sqrt()))
}

/// A mixture together with the exact components it was summed from.
#[derive(Debug, Clone)]
pub struct Mixture {
    /// Signal component after any joint gain.
    pub signal: AudioClip,
    /// β-scaled noise component after any joint gain.
    pub noise: AudioClip,
    pub mixture: AudioClip,
    pub beta: f64,
    /// Joint gain applied to both components (1 without peak normalization).
    pub gain: f64,
}

impl Mixture {
    pub fn measured_snr_db(&self) -> Result<f64> {
        measured_snr_db(&self.signal, &self.noise)
    }
}

/// `10·log10(rms(s)² / rms(n)²)` of two separated components.
pub fn measured_snr_db(signal: &AudioClip, noise: &AudioClip) -> Result<f64> {
    let a_s = rms(signal)?;
    let a_n = rms(noise)?;
    Ok(10.0 * (a_s * a_s / (a_n * a_n)).log10())
}

/// `s + β·n` at the requested decibel SNR, without normalization.
pub fn mix_at_snr(signal: &AudioClip, noise: &AudioClip, snr: SnrLabel) -> Result<AudioClip> {
    let db = snr
        .db()
        .ok_or_else(|| Error::InvalidParameter("cannot mix at the noise label".into()))?;
    Ok(mix_components(signal, noise, db, None)?.mixture)
}

/// Mixes at `snr_db`, optionally rescaling signal and noise jointly so the
/// mixture peaks at `peak`. The joint gain leaves the SNR untouched.
pub fn mix_components(
    signal: &AudioClip,
    noise: &AudioClip,
    snr_db: f64,
    peak: Option<f64>,
) -> Result<Mixture> {
    if signal.len() != noise.len() || signal.sample_rate() != noise.sample_rate() {
        return Err(Error::Mismatch(format!(
            "signal {}@{} Hz vs noise {}@{} Hz",
            signal.len(),
            signal.sample_rate(),
            noise.len(),
            noise.sample_rate()
        )));
    }
    let a_s = rms(signal)?;
    let a_n = rms(noise)?;
    if a_s == 0.0 {
        return Err(Error::Silent("signal"));
    }
    if a_n == 0.0 {
        return Err(Error::Silent("noise"));
    }
    let beta = compute_beta(a_s, a_n, snr_db_to_linear(snr_db))?;
    let mixed: Vec<f64> = signal
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(s, n)| s + beta * n)
        .collect();
    let gain = match peak {
        Some(target) => {
            let p = mixed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if p > 0.0 {
                target / p
            } else {
                1.0
            }
        }
        None => 1.0,
    };
    let rate = signal.sample_rate();
    Ok(Mixture {
        signal: signal.scaled(gain),
        noise: noise.scaled(beta * gain),
        mixture: AudioClip::new(mixed.iter().map(|v| v * gain).collect(), rate)?,
        beta,
        gain,
    })
}

/// Signal-independent synthesis settings shared by dataset builds and the
/// generator simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSettings {
    pub sample_rate: u32,
    pub clip_len: f64,
    pub whistle: WhistleRanges,
    pub noise: NoiseKind,
    /// Directory of mono WAV noise recordings used instead of synthetic noise.
    pub noise_dir: Option<PathBuf>,
    /// Joint peak normalization target; `None` disables it.
    pub peak: Option<f64>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            sample_rate: 32000,
            clip_len: 1.0,
            whistle: WhistleRanges::default(),
            noise: NoiseKind::Pink,
            noise_dir: None,
            peak: Some(0.9),
        }
    }
}

impl SynthSettings {
    pub fn clip_samples(&self) -> usize {
        (self.clip_len * self.sample_rate as f64).round() as usize
    }
}

/// Where background noise comes from.
#[derive(Debug, Clone)]
pub enum NoiseBank {
    Synthetic(NoiseKind),
    Recordings(Vec<AudioClip>),
}

impl NoiseBank {
    pub fn from_settings(settings: &SynthSettings) -> Result<Self> {
        let Some(dir) = &settings.noise_dir else {
            return Ok(NoiseBank::Synthetic(settings.noise));
        };
        let mut paths = wav_files(dir)?;
        paths.sort();
        let need = settings.clip_samples();
        let mut clips = Vec::with_capacity(paths.len());
        for path in paths {
            let clip = read_wav(&path)?;
            if clip.sample_rate() != settings.sample_rate {
                return Err(Error::Mismatch(format!(
                    "{}: {} Hz, expected {} Hz",
                    path.display(),
                    clip.sample_rate(),
                    settings.sample_rate
                )));
            }
            if clip.len() < need {
                return Err(Error::Mismatch(format!(
                    "{}: {} samples, need at least {need}",
                    path.display(),
                    clip.len()
                )));
            }
            clips.push(clip);
        }
        if clips.is_empty() {
            return Err(Error::EmptyInput("noise recording directory"));
        }
        Ok(NoiseBank::Recordings(clips))
    }

    /// One noise clip of the configured length, deterministic in `seed`.
    pub fn draw(&self, settings: &SynthSettings, seed: u64) -> Result<AudioClip> {
        match self {
            NoiseBank::Synthetic(kind) => {
                gen_noise(*kind, settings.clip_len, settings.sample_rate, seed)
            }
            NoiseBank::Recordings(clips) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let clip = &clips[rng.gen_range(0..clips.len())];
                let need = settings.clip_samples();
                let offset = rng.gen_range(0..=clip.len() - need);
                AudioClip::new(
                    clip.samples()[offset..offset + need].to_vec(),
                    settings.sample_rate,
                )
            }
        }
    }
}

pub(crate) fn wav_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"))
        {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// One whistle mixture drawn from `settings`, deterministic in `seed`.
fn draw_mixture(
    settings: &SynthSettings,
    noise: &NoiseBank,
    snr_db: f64,
    seed: u64,
    jitter: Option<f64>,
) -> Result<Mixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = settings.whistle.sample(&mut rng, settings.clip_len);
    if let Some(frac) = jitter {
        let nyquist = settings.sample_rate as f64 / 2.0;
        let lo = spec.f_start * (1.0 + frac * (2.0 * rng.gen::<f64>() - 1.0));
        let hi = spec.f_end * (1.0 + frac * (2.0 * rng.gen::<f64>() - 1.0));
        spec.f_start = lo.min(hi).max(1.0);
        spec.f_end = lo.max(hi).min(nyquist);
        if spec.f_end <= spec.f_start {
            spec.f_end = (spec.f_start + 1.0).min(nyquist);
        }
    }
    let whistle = gen_whistle(&spec, settings.clip_len, settings.sample_rate)?;
    let background = noise.draw(settings, rng.next_u64())?;
    mix_components(&whistle, &background, snr_db, settings.peak)
}

fn noise_only(settings: &SynthSettings, noise: &NoiseBank, seed: u64) -> Result<AudioClip> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clip = noise.draw(settings, rng.next_u64())?;
    Ok(match settings.peak {
        Some(target) if clip.peak() > 0.0 => clip.scaled(target / clip.peak()),
        _ => clip,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatio {
    fn default() -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitRatio {
    /// Split sizes for `n` items; the test split takes the remainder.
    pub fn counts(&self, n: usize) -> Result<(usize, usize, usize)> {
        let total = self.train + self.val + self.test;
        if self.train < 0.0 || self.val < 0.0 || self.test < 0.0 || !(total > 0.0) {
            return Err(Error::InvalidParameter(
                "split ratios must be non-negative".into(),
            ));
        }
        let train = ((n as f64 * self.train / total).round() as usize).min(n);
        let val = ((n as f64 * self.val / total).round() as usize).min(n - train);
        Ok((train, val, n - train - val))
    }

    /// Shuffled split assignment for `n` items.
    pub fn assign(&self, n: usize, seed: u64) -> Result<Vec<Split>> {
        let (train, val, _) = self.counts(n)?;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut splits = vec![Split::Test; n];
        for (rank, &i) in order.iter().enumerate() {
            splits[i] = if rank < train {
                Split::Train
            } else if rank < train + val {
                Split::Val
            } else {
                Split::Test
            };
        }
        Ok(splits)
    }
}

/// Everything a dataset build depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub grid: Vec<f64>,
    pub clips_per_level: usize,
    /// Noise-only clips; defaults to `clips_per_level` when absent.
    pub noise_clips: Option<usize>,
    pub split: SplitRatio,
    pub seed: u64,
    pub synth: SynthSettings,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            grid: vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0],
            clips_per_level: 500,
            noise_clips: None,
            split: SplitRatio::default(),
            seed: 0,
            synth: SynthSettings::default(),
        }
    }
}

impl DatasetConfig {
    pub fn noise_count(&self) -> usize {
        self.noise_clips.unwrap_or(self.clips_per_level)
    }

    /// All class labels in generation order: grid levels, then noise.
    pub fn labels(&self) -> Vec<SnrLabel> {
        self.grid
            .iter()
            .map(|&db| SnrLabel::Decibel(db))
            .chain(std::iter::once(SnrLabel::Noise))
            .collect()
    }

    pub fn total_clips(&self) -> usize {
        self.grid.len() * self.clips_per_level + self.noise_count()
    }
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the dataset root.
    pub path: PathBuf,
    pub label: SnrLabel,
    pub split: Split,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub grid: Vec<f64>,
    pub clips_per_level: usize,
}

impl DatasetManifest {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// SHA-256 of the JSON-lines manifest, hex encoded.
    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_jsonl()?.as_bytes())))
    }

    pub fn save(&self) -> Result<()> {
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }

    /// Loads `manifest.jsonl` from `root`; the grid is read from the
    /// accompanying `dataset.toml` when present, else recovered from labels.
    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.clone()),
            _ => Error::io(&path, e),
        })?;
        let mut entries = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            entries.push(serde_json::from_str::<ManifestEntry>(line)?);
        }
        let (grid, clips_per_level) = match load_dataset_config(&root) {
            Ok(cfg) => (cfg.grid, cfg.clips_per_level),
            Err(_) => {
                let mut grid: Vec<f64> = entries.iter().filter_map(|e| e.label.db()).collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                let per = grid
                    .first()
                    .map(|&g| {
                        entries
                            .iter()
                            .filter(|e| e.label == SnrLabel::Decibel(g))
                            .count()
                    })
                    .unwrap_or(0);
                (grid, per)
            }
        };
        Ok(Self {
            root,
            entries,
            grid,
            clips_per_level,
        })
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.path)
    }

    pub fn select<'a>(
        &'a self,
        label: SnrLabel,
        split: Split,
    ) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.label == label && e.split == split)
    }

    pub fn labels(&self) -> Vec<SnrLabel> {
        let mut labels: Vec<SnrLabel> = self.entries.iter().map(|e| e.label).collect();
        labels.sort();
        labels.dedup();
        labels
    }
}

pub fn load_dataset_config(root: &Path) -> Result<DatasetConfig> {
    let path = root.join(DATASET_CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Generates every clip of `cfg` into `out_dir` and writes the manifest and
/// resolved configuration next to them.
///
/// Clip `i` draws from its own seed stream, so the output is identical
/// whatever the worker count.
pub fn build_dataset(cfg: &DatasetConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let out_dir = out_dir.as_ref();
    if cfg.grid.is_empty() {
        return Err(Error::InvalidParameter("SNR grid is empty".into()));
    }
    if cfg.clips_per_level == 0 {
        return Err(Error::InvalidParameter(
            "clips_per_level must be at least 1".into(),
        ));
    }
    let labels = cfg.labels();
    let noise_bank = NoiseBank::from_settings(&cfg.synth)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for label in &labels {
        let dir = out_dir.join(label.tag());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    // (label, index within class, global index)
    let mut plan = Vec::with_capacity(cfg.total_clips());
    for (class, label) in labels.iter().enumerate() {
        let count = if label.is_noise() {
            cfg.noise_count()
        } else {
            cfg.clips_per_level
        };
        for j in 0..count {
            plan.push((class, *label, j));
        }
    }

    let mut class_splits = Vec::with_capacity(labels.len());
    for class in 0..labels.len() {
        let count = plan.iter().filter(|p| p.0 == class).count();
        let seed = derive_seed(cfg.seed, u64::MAX - class as u64);
        class_splits.push(cfg.split.assign(count, seed)?);
    }

    let entries = plan
        .par_iter()
        .enumerate()
        .map(|(global, &(class, label, j))| {
            let seed = derive_seed(cfg.seed, global as u64);
            let clip = match label {
                SnrLabel::Decibel(db) => {
                    draw_mixture(&cfg.synth, &noise_bank, db, seed, None)?.mixture
                }
                SnrLabel::Noise => noise_only(&cfg.synth, &noise_bank, seed)?,
            };
            let rel = PathBuf::from(label.tag()).join(format!("{}_{j:06}.wav", label.tag()));
            write_wav(out_dir.join(&rel), &clip)?;
            Ok(ManifestEntry {
                path: rel,
                label,
                split: class_splits[class][j],
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        root: out_dir.to_path_buf(),
        entries,
        grid: cfg.grid.clone(),
        clips_per_level: cfg.clips_per_level,
    };
    manifest.save()?;
    let cfg_path = out_dir.join(DATASET_CONFIG_FILE);
    let text = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    fs::File::create(&cfg_path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| Error::io(&cfg_path, e))?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    #[default]
    Clean,
    /// Whistle band edges jittered by up to ±10%.
    Degraded,
}

impl std::str::FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" => Ok(Quality::Clean),
            "degraded" => Ok(Quality::Degraded),
            other => Err(Error::InvalidParameter(format!(
                "unknown quality {other:?}"
            ))),
        }
    }
}

/// A stand-in generator that emits whistle mixtures whose actual SNR sits
/// `bias_db` below the requested target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSimulator {
    pub bias_db: f64,
    pub quality: Quality,
    pub count: usize,
    pub seed: u64,
}

impl Default for GeneratorSimulator {
    fn default() -> Self {
        Self {
            bias_db: 0.0,
            quality: Quality::Clean,
            count: 500,
            seed: 0,
        }
    }
}

impl GeneratorSimulator {
    /// Mixtures with their components, for ground-truth checks.
    pub fn mixtures(&self, target: SnrLabel, settings: &SynthSettings) -> Result<Vec<Mixture>> {
        let target_db = target
            .db()
            .ok_or_else(|| Error::InvalidParameter("simulator target must be a dB level".into()))?;
        if self.count == 0 {
            return Err(Error::InvalidParameter(
                "simulator count must be at least 1".into(),
            ));
        }
        let noise = NoiseBank::from_settings(settings)?;
        let level_seed = derive_seed(self.seed, (target_db + 0.0).to_bits());
        let jitter = match self.quality {
            Quality::Clean => None,
            Quality::Degraded => Some(0.1),
        };
        (0..self.count)
            .into_par_iter()
            .map(|i| {
                draw_mixture(
                    settings,
                    &noise,
                    target_db - self.bias_db,
                    derive_seed(level_seed, i as u64),
                    jitter,
                )
            })
            .collect()
    }
}

/// Clips from the simulated generator at `target`.
pub fn simulate_generator(
    sim: &GeneratorSimulator,
    target: SnrLabel,
    settings: &SynthSettings,
) -> Result<Vec<AudioClip>> {
    Ok(sim
        .mixtures(target, settings)?
        .into_iter()
        .map(|m| m.mixture)
        .collect())
}
