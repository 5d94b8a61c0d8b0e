//! Frequency-spectrum and pixel-intensity scores of simulated generator
//! output at each SNR level, against references built from true mixtures.
//!
//! ```text
//! cargo run --release --example spectral_scores
//! ```

use snrge::dsp::StftConfig;
use snrge::metrics::{evaluate_snr_level, Method, References, DEFAULT_FFT_SIZE};
use snrge::synth::{gen_noise, simulate_generator, GeneratorSimulator, NoiseKind, SynthSettings};
use snrge::SnrLabel;

fn main() -> snrge::Result<()> {
    let settings = SynthSettings::default();
    let noise: Vec<_> = (0..60)
        .map(|i| gen_noise(NoiseKind::Pink, 1.0, 32000, 10_000 + i))
        .collect::<Result<_, _>>()?;
    let candidates = GeneratorSimulator {
        count: 100,
        seed: 1,
        ..Default::default()
    };
    let noise_probes: Vec<_> = (0..100)
        .map(|i| gen_noise(NoiseKind::Pink, 1.0, 32000, 50_000 + i))
        .collect::<Result<_, _>>()?;

    println!(
        "{:>8} {:>10} {:>10} {:>12}",
        "SNR", "frequency", "pixels", "noise(freq)"
    );
    for db in [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0] {
        let level = SnrLabel::Decibel(db);
        let refs_w = simulate_generator(
            &GeneratorSimulator {
                count: 60,
                seed: 99,
                ..Default::default()
            },
            level,
            &settings,
        )?;
        let samples = simulate_generator(&candidates, level, &settings)?;
        let mut row = Vec::new();
        for method in [Method::Frequency, Method::Pixels] {
            let refs = References::build(
                method,
                &refs_w,
                &noise,
                DEFAULT_FFT_SIZE,
                StftConfig::default(),
            )?;
            row.push(evaluate_snr_level(level, &samples, &refs)?.mean_score);
        }
        let refs = References::frequency(&refs_w, &noise, DEFAULT_FFT_SIZE)?;
        let noise_score = evaluate_snr_level(SnrLabel::Noise, &noise_probes, &refs)?.mean_score;
        println!(
            "{db:>5} dB {:>10.3} {:>10.3} {:>12.3}",
            row[0], row[1], noise_score
        );
    }
    Ok(())
}
