//! Generate one upsweep whistle, mix it with pink noise at several SNRs and
//! write the mixtures as 16-bit WAVs.
//!
//! ```text
//! cargo run --example mix_at_snr -- [out_dir]
//! ```

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snrge::audio::{read_wav, write_wav};
use snrge::synth::{gen_noise, gen_whistle, mix_components, NoiseKind, WhistleRanges};

fn main() -> snrge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("snrge_mix"));
    std::fs::create_dir_all(&out).map_err(|e| snrge::Error::Io {
        path: out.clone(),
        source: e,
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = WhistleRanges::default().sample(&mut rng, 1.0);
    println!(
        "whistle: {:.0} Hz -> {:.0} Hz over {:.2} s starting at {:.2} s",
        spec.f_start, spec.f_end, spec.duration, spec.onset
    );
    let whistle = gen_whistle(&spec, 1.0, 32000)?;
    let noise = gen_noise(NoiseKind::Pink, 1.0, 32000, 11)?;

    println!(
        "{:>8} {:>10} {:>12} {:>14}",
        "target", "beta", "measured", "after wav"
    );
    for snr in [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0] {
        let mix = mix_components(&whistle, &noise, snr, Some(0.9))?;
        let path = out.join(format!("mix_{snr}dB.wav"));
        write_wav(&path, &mix.mixture)?;
        // the file holds only the mixture, so compare its noise residual
        let back = read_wav(&path)?;
        let residual: Vec<f64> = back
            .samples()
            .iter()
            .zip(mix.signal.samples())
            .map(|(x, s)| x - s)
            .collect();
        let residual = snrge::AudioClip::new(residual, 32000)?;
        let after = snrge::synth::measured_snr_db(&mix.signal, &residual)?;
        println!(
            "{snr:>6} dB {:>10.4} {:>9.6} dB {:>11.4} dB",
            mix.beta,
            mix.measured_snr_db()?,
            after
        );
    }
    println!("wrote mixtures to {}", out.display());
    Ok(())
}
