//! Exact t-SNE of three Gaussian clusters, written as an SVG scatter with a
//! companion CSV.
//!
//! ```text
//! cargo run --release --example tsne_projection -- [out.svg]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use snrge::viz::{emit_scatter, silhouette, tsne_project, TsneConfig};
use snrge::SnrLabel;

fn main() -> snrge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("snrge_tsne.svg"));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let labels = [
        SnrLabel::Noise,
        SnrLabel::Decibel(-5.0),
        SnrLabel::Decibel(10.0),
    ];
    let mut points = Vec::new();
    let mut point_labels = Vec::new();
    for (c, label) in labels.iter().enumerate() {
        for _ in 0..80 {
            let p: Vec<f64> = (0..16)
                .map(|d| normal.sample(&mut rng) + if d == c { 8.0 } else { 0.0 })
                .collect();
            points.push(p);
            point_labels.push(*label);
        }
    }
    let proj = tsne_project(&points, &point_labels, &TsneConfig::default())?;
    println!(
        "KL after exaggeration {:.4}, final {:.4}, silhouette {:.3}",
        proj.kl_after_exaggeration,
        proj.final_kl,
        silhouette(&proj.points, &proj.labels)
    );
    emit_scatter(&proj, "three clusters", &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
