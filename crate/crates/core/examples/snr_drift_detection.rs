//! Train one network over every SNR level, then ask whether a simulated
//! generator that under-shoots its target by 5 dB is caught: KNN regression
//! on its embeddings should place its 10 dB output near 5 dB.
//!
//! This runs a reduced grid and takes a few minutes in release mode.
//!
//! ```text
//! cargo run --release --example snr_drift_detection -- [work_dir]
//! ```

use snrge::harness::{evaluate_single, train_single, Dataset, ExperimentConfig, SampleSource};
use snrge::synth::{build_dataset, GeneratorSimulator};

fn main() -> snrge::Result<()> {
    let work = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("snrge_drift"));
    let mut cfg = ExperimentConfig::default();
    cfg.dataset.grid = vec![-10.0, 0.0, 5.0, 10.0];
    cfg.dataset.clips_per_level = 150;
    cfg.embedder.input_shape = (64, 64);
    cfg.embedder.epochs = 15;
    cfg.embedder.learning_rate = 1e-3;
    cfg.knn.k_max = 300;
    cfg.tsne_per_label = 0;
    build_dataset(&cfg.dataset, &work)?;
    let data = Dataset::open(&work)?;

    let (net, history) = train_single(&data, &cfg)?;
    println!(
        "final validation loss {:.4}",
        history.last().map_or(f64::NAN, |e| e.val_loss)
    );

    for bias in [0.0, 5.0] {
        let source = SampleSource::Simulator(GeneratorSimulator {
            bias_db: bias,
            count: 100,
            seed: 8,
            ..Default::default()
        });
        let report = evaluate_single(&net, &data, &source, &cfg)?;
        println!(
            "\nsimulator bias {bias} dB (k = {})",
            report.knn_k.unwrap_or(0)
        );
        println!(
            "{:>8} {:>10} {:>10} {:>12}",
            "target", "NC acc", "RMSDE", "mean pred"
        );
        for r in &report.records {
            println!(
                "{:>5} dB {:>10.3} {:>7.2} dB {:>9.2} dB",
                r.snr_db,
                r.nc_accuracy.unwrap_or(f64::NAN),
                r.rmsde_weighted.unwrap_or(f64::NAN),
                r.mean_predicted_db.unwrap_or(f64::NAN)
            );
        }
        if bias == 0.0 {
            println!(
                "held-out dataset RMSDE {:.3} dB",
                report.pooled_test_rmsde.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
