//! Synthesis of SNR-controlled whistle/noise datasets and evaluation of
//! generated audio against them.
//!
//! The crate is organised bottom-up:
//!
//! - [`audio`]: mono clip container, WAV I/O, RMS.
//! - [`synth`]: upsweep whistles, pink/white noise, exact-SNR mixing,
//!   dataset builds and a biased generator simulator.
//! - [`dsp`]: FFT spectra, greyscale STFT spectrograms, pixel-intensity
//!   distributions, Pearson correlation.
//! - [`metrics`]: frequency-spectrum and pixel-intensity scoring.
//! - [`embedder`]: convolutional embedding network, semi-hard triplet mining,
//!   Adam, training, random hyperparameter search, checkpoints.
//! - [`inference`]: nearest centroid, KNN SNR regression, RMSDE, elbow K.
//! - [`viz`]: exact t-SNE and SVG/CSV figures.
//! - [`harness`]: experiment configuration, sample sources, workflows and
//!   report emission, plus the command-line front end.

pub mod audio;
pub mod dsp;
pub mod embedder;
pub mod error;
pub mod harness;
pub mod inference;
pub mod label;
pub mod metrics;
pub mod synth;
pub mod viz;

pub use audio::AudioClip;
pub use error::{Error, Result};
pub use label::SnrLabel;
