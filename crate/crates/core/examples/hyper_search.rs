//! Seeded random search over depth, head size, learning rate and embedding
//! size, ranked by final validation loss.
//!
//! ```text
//! cargo run --release --example hyper_search
//! ```

use snrge::dsp::StftConfig;
use snrge::embedder::{hyper_search, EmbedderConfig, LabeledInputs, SearchSpace};
use snrge::harness::prepare_inputs;
use snrge::synth::{gen_noise, simulate_generator, GeneratorSimulator, NoiseKind, SynthSettings};
use snrge::SnrLabel;

fn toy_set(n: usize, seed: u64, shape: (usize, usize)) -> snrge::Result<LabeledInputs> {
    let whistles = simulate_generator(
        &GeneratorSimulator {
            count: n,
            seed,
            ..Default::default()
        },
        SnrLabel::Decibel(0.0),
        &SynthSettings::default(),
    )?;
    let noise: Vec<_> = (0..n as u64)
        .map(|i| gen_noise(NoiseKind::Pink, 1.0, 32000, seed * 1000 + i))
        .collect::<Result<_, _>>()?;
    let mut set = LabeledInputs::default();
    for (class, clips) in [noise, whistles].iter().enumerate() {
        let inputs = prepare_inputs(clips, &StftConfig::default(), shape)?;
        set.labels.extend(std::iter::repeat_n(class, inputs.len()));
        set.inputs.extend(inputs);
    }
    Ok(set)
}

fn main() -> snrge::Result<()> {
    let base = EmbedderConfig {
        input_shape: (32, 32),
        epochs: 4,
        batch_size: 16,
        ..Default::default()
    };
    let train = toy_set(48, 1, base.input_shape)?;
    let val = toy_set(16, 2, base.input_shape)?;
    let space = SearchSpace {
        conv_blocks: (1, 4),
        dense_layers: (1, 2),
        learning_rate: (1e-4, 1e-2),
        embedding_dim: (4, 32),
    };
    let outcome = hyper_search(&space, &base, 6, 17, &train, &val)?;
    for (i, t) in outcome.trials.iter().enumerate() {
        let c = &t.config;
        println!(
            "trial {i}: blocks {} dense {} lr {:.2e} dim {:>2} -> val loss {:.4}",
            c.conv_blocks, c.dense_layers, c.learning_rate, c.embedding_dim, t.val_loss
        );
    }
    let b = &outcome.best;
    println!(
        "best: blocks {} dense {} lr {:.2e} dim {} (val loss {:.4})",
        b.conv_blocks, b.dense_layers, b.learning_rate, b.embedding_dim, outcome.best_val_loss
    );
    Ok(())
}
