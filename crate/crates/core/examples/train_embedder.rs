//! Train a whistle-vs-noise embedding network on a freshly built dataset,
//! save the checkpoint and loss history, and check nearest-centroid
//! accuracy on the held-out split.
//!
//! ```text
//! cargo run --release --example train_embedder -- [out_dir]
//! ```

use snrge::dsp::StftConfig;
use snrge::embedder::{
    load_checkpoint, save_checkpoint, train, write_loss_history, EmbedderConfig, EmbedderNetwork,
    LabeledInputs,
};
use snrge::harness::{prepare_inputs, Dataset};
use snrge::inference::compute_centroids;
use snrge::synth::{build_dataset, DatasetConfig, Split};
use snrge::SnrLabel;

fn main() -> snrge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("snrge_train"));
    let data_dir = out.join("dataset");
    build_dataset(
        &DatasetConfig {
            grid: vec![5.0],
            clips_per_level: 150,
            seed: 4,
            ..Default::default()
        },
        &data_dir,
    )?;
    let data = Dataset::open(&data_dir)?;
    let cfg = EmbedderConfig {
        input_shape: (64, 64),
        epochs: 10,
        learning_rate: 1e-3,
        target_val_loss: Some(0.1),
        ..Default::default()
    };
    let stft = StftConfig::default();
    let level = SnrLabel::Decibel(5.0);
    let set = |split| -> snrge::Result<(LabeledInputs, Vec<SnrLabel>)> {
        let mut s = LabeledInputs::default();
        let mut labels = Vec::new();
        for (class, label) in [SnrLabel::Noise, level].into_iter().enumerate() {
            let inputs = prepare_inputs(&data.clips(label, split)?, &stft, cfg.input_shape)?;
            s.labels.extend(std::iter::repeat_n(class, inputs.len()));
            labels.extend(std::iter::repeat_n(label, inputs.len()));
            s.inputs.extend(inputs);
        }
        Ok((s, labels))
    };
    let (train_set, train_labels) = set(Split::Train)?;
    let (val_set, _) = set(Split::Val)?;
    let (test_set, test_labels) = set(Split::Test)?;

    let mut net = EmbedderNetwork::new(cfg)?;
    println!("{} parameters", net.parameter_count());
    let outcome = train(&mut net, &train_set, &val_set)?;
    for e in &outcome.history {
        println!(
            "epoch {:>2}: train {:.4} val {:.4}",
            e.epoch, e.train_loss, e.val_loss
        );
    }
    write_loss_history(&outcome.history, out.join("loss.csv"))?;
    save_checkpoint(&net, out.join("embedder.ckpt"))?;
    let net = load_checkpoint(out.join("embedder.ckpt"))?;

    let embed = |s: &LabeledInputs| -> snrge::Result<Vec<Vec<f64>>> {
        s.inputs
            .iter()
            .map(|x| Ok(net.forward(x)?.embedding))
            .collect()
    };
    let centroids = compute_centroids(&embed(&train_set)?, &train_labels)?;
    let test_emb = embed(&test_set)?;
    let correct = test_emb
        .iter()
        .zip(&test_labels)
        .filter(|(e, l)| centroids.nc_predict(e).ok().as_ref() == Some(*l))
        .count();
    println!(
        "held-out NC accuracy {:.3}",
        correct as f64 / test_labels.len() as f64
    );
    Ok(())
}
