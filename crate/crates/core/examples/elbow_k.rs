//! KNN regression of a noisy 1-D target: sweep K, print the RMSE, R² and
//! neighbour-distance curves, and pick K at the elbow.
//!
//! ```text
//! cargo run --release --example elbow_k
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snrge::inference::{find_knee, select_k_elbow, KnnRegressor, Weighting};

fn main() -> snrge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // three SNR-like clusters along a line with linear targets
    let mut sample = |n: usize| {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let class = i % 3;
            x.push(vec![
                class as f64 + rng.gen_range(-0.2..0.2),
                rng.gen_range(-0.2..0.2),
            ]);
            y.push([0.1, 1.0, 10.0][class]);
        }
        (x, y)
    };
    let (rx, ry) = sample(600);
    let (vx, vy) = sample(150);
    let refs = KnnRegressor::new(rx, ry)?;
    let sel = select_k_elbow(&refs, &vx, &vy, 1..=600, Weighting::InverseDistance)?;
    for p in sel.curve.iter().step_by(50) {
        println!(
            "k={:>4} rmse={:.4} r2={:.4} max_dist={:.3}",
            p.k, p.rmse, p.r2, p.max_dist
        );
    }
    println!("elbow at k = {}", sel.chosen_k);

    // a curve with an obvious knee
    let xs: Vec<f64> = (1..=100).map(f64::from).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&k| {
            if k <= 20.0 {
                10.0 - 0.45 * k
            } else {
                1.0 - 0.001 * k
            }
        })
        .collect();
    println!("constructed knee found at k = {}", xs[find_knee(&xs, &ys)?]);
    Ok(())
}
