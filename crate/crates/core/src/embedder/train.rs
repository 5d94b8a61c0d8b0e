use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::mining::{semi_hard_triplets, Triplet};
use super::network::EmbedderNetwork;
use crate::error::{Error, Result};
use crate::inference::euclidean;
use crate::synth::derive_seed;

/// `max(0, d_ap − d_an + margin)`.
pub fn triplet_loss(d_ap: f64, d_an: f64, margin: f64) -> f64 {
    (d_ap - d_an + margin).max(0.0)
}

/// Mean triplet loss over `triplets` and its gradient with respect to every
/// embedding. An empty triplet list has zero loss.
pub fn batch_triplet_loss(
    embeddings: &[Vec<f64>],
    triplets: &[Triplet],
    margin: f64,
) -> (f64, Vec<Vec<f64>>) {
    let dim = embeddings.first().map_or(0, Vec::len);
    let mut grads = vec![vec![0.0; dim]; embeddings.len()];
    if triplets.is_empty() {
        return (0.0, grads);
    }
    let scale = 1.0 / triplets.len() as f64;
    let mut total = 0.0;
    for t in triplets {
        let (a, p, n) = (
            &embeddings[t.anchor],
            &embeddings[t.positive],
            &embeddings[t.negative],
        );
        let d_ap = euclidean(a, p);
        let d_an = euclidean(a, n);
        let loss = triplet_loss(d_ap, d_an, margin);
        if loss <= 0.0 {
            continue;
        }
        total += loss;
        for k in 0..dim {
            // ∂d(x, y)/∂x = (x − y)/d
            let g_ap = if d_ap > 0.0 {
                (a[k] - p[k]) / d_ap
            } else {
                0.0
            };
            let g_an = if d_an > 0.0 {
                (a[k] - n[k]) / d_an
            } else {
                0.0
            };
            grads[t.anchor][k] += scale * (g_ap - g_an);
            grads[t.positive][k] -= scale * g_ap;
            grads[t.negative][k] += scale * g_an;
        }
    }
    (total * scale, grads)
}

/// Network inputs with integer class labels.
#[derive(Debug, Clone, Default)]
pub struct LabeledInputs {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledInputs {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Draws class-balanced batches: each batch holds `P` classes with `K`
/// members apiece, `P = min(classes, batch/2)`, `K = batch/P ≥ 2`.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    by_class: Vec<Vec<usize>>,
    per_batch_classes: usize,
    per_class: usize,
    batches_per_epoch: usize,
}

impl BatchSampler {
    pub fn new(labels: &[usize], batch_size: usize) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut by_class = vec![Vec::new(); classes];
        for (i, &l) in labels.iter().enumerate() {
            by_class[l].push(i);
        }
        by_class.retain(|c| !c.is_empty());
        if by_class.len() < 2 {
            return Err(Error::Stratification(format!(
                "{} class(es) present, need at least 2",
                by_class.len()
            )));
        }
        if let Some(small) = by_class.iter().find(|c| c.len() < 2) {
            return Err(Error::Stratification(format!(
                "class with {} member(s), need at least 2",
                small.len()
            )));
        }
        if batch_size < 4 {
            return Err(Error::Stratification(format!(
                "batch size {batch_size} cannot hold 2 classes x 2 members"
            )));
        }
        let per_batch_classes = by_class.len().min(batch_size / 2);
        let per_class = batch_size / per_batch_classes;
        Ok(Self {
            by_class,
            per_batch_classes,
            per_class,
            batches_per_epoch: labels.len().div_ceil(batch_size),
        })
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.batches_per_epoch
    }

    /// Batches for one epoch, a pure function of `seed`.
    pub fn epoch(&self, seed: u64) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pools: Vec<Vec<usize>> = self.by_class.clone();
        pools.iter_mut().for_each(|p| shuffle(p, &mut rng));
        let mut cursors = vec![0usize; pools.len()];
        let mut class_order: Vec<usize> = Vec::new();
        let mut batches = Vec::with_capacity(self.batches_per_epoch);
        for _ in 0..self.batches_per_epoch {
            let mut chosen: Vec<usize> = Vec::with_capacity(self.per_batch_classes);
            while chosen.len() < self.per_batch_classes {
                if class_order.is_empty() {
                    class_order = (0..pools.len()).collect();
                    shuffle(&mut class_order, &mut rng);
                }
                let c = class_order.pop().expect("refilled");
                if !chosen.contains(&c) {
                    chosen.push(c);
                }
            }
            let mut batch = Vec::with_capacity(self.per_batch_classes * self.per_class);
            for &c in &chosen {
                for _ in 0..self.per_class.min(pools[c].len()) {
                    if cursors[c] == pools[c].len() {
                        shuffle(&mut pools[c], &mut rng);
                        cursors[c] = 0;
                    }
                    batch.push(pools[c][cursors[c]]);
                    cursors[c] += 1;
                }
            }
            batches.push(batch);
        }
        batches
    }
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        items.swap(i, rng.gen_range(0..=i));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: Vec<EpochLoss>,
    pub stopped_early: bool,
    pub skipped_steps: usize,
}

impl TrainOutcome {
    pub fn final_val_loss(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |e| e.val_loss)
    }
}

fn mean_batch_loss(
    embeddings: &[Vec<f64>],
    labels: &[usize],
    batches: &[Vec<usize>],
    margin: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for batch in batches {
        let e: Vec<Vec<f64>> = batch.iter().map(|&i| embeddings[i].clone()).collect();
        let l: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
        let triplets = semi_hard_triplets(&e, &l, margin)?;
        total += batch_triplet_loss(&e, &triplets, margin).0;
    }
    Ok(total / batches.len().max(1) as f64)
}

/// Mined-triplet Adam training using the network's own configuration.
///
/// Per-sample work runs in parallel but gradients are summed in batch
/// order, so results do not depend on the thread count.
pub fn train(
    net: &mut EmbedderNetwork,
    train_set: &LabeledInputs,
    val_set: &LabeledInputs,
) -> Result<TrainOutcome> {
    let cfg = net.config().clone();
    let sampler = BatchSampler::new(&train_set.labels, cfg.batch_size)?;
    let val_sampler = BatchSampler::new(&val_set.labels, cfg.batch_size)?;
    let val_batches = val_sampler.epoch(derive_seed(cfg.seed, u64::MAX));
    let adam = AdamConfig::with_lr(cfg.learning_rate);
    let mut state = AdamState::zeros_like(net.params());
    let mut step: u64 = 0;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut skipped = 0;
    let mut stopped_early = false;

    for epoch in 0..cfg.epochs {
        let batches = sampler.epoch(derive_seed(cfg.seed, epoch as u64));
        let mut epoch_loss = 0.0;
        for batch in &batches {
            let traces = batch
                .par_iter()
                .map(|&i| net.forward(&train_set.inputs[i]))
                .collect::<Result<Vec<_>>>()?;
            let embeddings: Vec<Vec<f64>> = traces.iter().map(|t| t.embedding.clone()).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| train_set.labels[i]).collect();
            let triplets = semi_hard_triplets(&embeddings, &labels, cfg.margin)?;
            let (loss, grad_e) = batch_triplet_loss(&embeddings, &triplets, cfg.margin);
            if !loss.is_finite() {
                return Err(Error::Divergence(format!("loss {loss} at epoch {epoch}")));
            }
            epoch_loss += loss;

            let net_ref: &EmbedderNetwork = net;
            let per_sample = traces
                .par_iter()
                .zip(grad_e.par_iter())
                .map(|(trace, g)| {
                    if g.iter().all(|&v| v == 0.0) {
                        return Ok(None);
                    }
                    let mut grads = net_ref.zero_grads();
                    net_ref.backward(trace, g, &mut grads)?;
                    Ok(Some(grads))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grads = net.zero_grads();
            for sample in per_sample.into_iter().flatten() {
                for (acc, g) in grads.iter_mut().zip(&sample) {
                    acc.iter_mut().zip(g).for_each(|(a, v)| *a += v);
                }
            }
            step += 1;
            match adam_step(net.params_mut(), &grads, &mut state, &adam, step) {
                Ok(()) => {}
                Err(Error::NonFiniteGradient) => {
                    log::warn!("non-finite gradient at epoch {epoch}, step {step} skipped");
                    skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
        let train_loss = epoch_loss / batches.len() as f64;

        let net_ref: &EmbedderNetwork = net;
        let val_embeddings = val_set
            .inputs
            .par_iter()
            .map(|x| Ok(net_ref.forward(x)?.embedding))
            .collect::<Result<Vec<_>>>()?;
        let val_loss = mean_batch_loss(&val_embeddings, &val_set.labels, &val_batches, cfg.margin)?;
        if !val_loss.is_finite() {
            return Err(Error::Divergence(format!(
                "validation loss {val_loss} at epoch {epoch}"
            )));
        }
        log::debug!("epoch {epoch}: train {train_loss:.4} val {val_loss:.4}");
        history.push(EpochLoss {
            epoch,
            train_loss,
            val_loss,
        });
        if cfg.target_val_loss.is_some_and(|target| val_loss <= target) {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainOutcome {
        history,
        stopped_early,
        skipped_steps: skipped,
    })
}

/// Writes `epoch,train_loss,val_loss` rows.
pub fn write_loss_history(history: &[EpochLoss], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for row in history {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::EmbedderConfig;

    #[test]
    fn loss_examples() {
        assert_eq!(triplet_loss(0.5, 1.0, 0.2), 0.0);
        assert_eq!(triplet_loss(0.7, 0.7, 0.2), 0.2);
        assert!((triplet_loss(1.0, 0.3, 0.2) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn sampler_is_stratified() {
        let labels: Vec<usize> = (0..70).map(|i| i % 7).collect();
        let s = BatchSampler::new(&labels, 32).unwrap();
        for batch in s.epoch(3) {
            assert_eq!(batch.len(), 28);
            let mut counts = [0usize; 7];
            batch.iter().for_each(|&i| counts[labels[i]] += 1);
            assert!(counts.iter().filter(|&&c| c >= 2).count() >= 2);
        }
        assert_eq!(s.epoch(3), s.epoch(3));

        let two: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let s = BatchSampler::new(&two, 8).unwrap();
        for batch in s.epoch(0) {
            assert_eq!(batch.len(), 8);
        }
        assert!(BatchSampler::new(&[0, 0, 0], 8).is_err());
        assert!(BatchSampler::new(&[0, 0, 1], 8).is_err());
        assert!(BatchSampler::new(&[0, 0, 1, 1], 2).is_err());
    }

    fn toy_set(n: usize, seed: u64) -> LabeledInputs {
        // class 0: bright top half; class 1: bright bottom half
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = LabeledInputs::default();
        for i in 0..n {
            let label = i % 2;
            let x: Vec<f64> = (0..64)
                .map(|p| {
                    let top = p < 32;
                    let base = if (label == 0) == top { 0.8 } else { 0.1 };
                    base + rng.gen_range(-0.1..0.1)
                })
                .collect();
            set.inputs.push(x);
            set.labels.push(label);
        }
        set
    }

    fn toy_config() -> EmbedderConfig {
        EmbedderConfig {
            conv_blocks: 2,
            dense_layers: 1,
            embedding_dim: 4,
            input_shape: (8, 8),
            batch_size: 8,
            epochs: 30,
            learning_rate: 1e-2,
            seed: 1,
            ..Default::default()
        }
    }

    #[test]
    fn separable_toy_converges_deterministically() {
        let tr = toy_set(40, 1);
        let va = toy_set(16, 2);
        let mut a = EmbedderNetwork::new(toy_config()).unwrap();
        let out = train(&mut a, &tr, &va).unwrap();
        assert!(!out.history.is_empty());
        assert!(out
            .history
            .iter()
            .all(|e| e.train_loss.is_finite() && e.val_loss.is_finite()));
        assert!(out.final_val_loss() <= 0.1, "{:?}", out.history.last());

        let mut b = EmbedderNetwork::new(toy_config()).unwrap();
        train(&mut b, &tr, &va).unwrap();
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn early_stop() {
        let cfg = EmbedderConfig {
            target_val_loss: Some(0.12),
            epochs: 200,
            ..toy_config()
        };
        let mut net = EmbedderNetwork::new(cfg).unwrap();
        let out = train(&mut net, &toy_set(40, 1), &toy_set(16, 2)).unwrap();
        assert!(out.stopped_early);
        assert!(out.final_val_loss() <= 0.12);
        assert!(out.history.len() < 200);
    }

    fn batch_objective(
        net: &EmbedderNetwork,
        inputs: &[Vec<f64>],
        triplets: &[Triplet],
        margin: f64,
    ) -> f64 {
        let e: Vec<Vec<f64>> = inputs
            .iter()
            .map(|x| net.forward(x).unwrap().embedding)
            .collect();
        batch_triplet_loss(&e, triplets, margin).0
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let cfg = EmbedderConfig {
            conv_blocks: 2,
            dense_layers: 2,
            hidden_width: 12,
            embedding_dim: 4,
            input_shape: (8, 8),
            seed: 11,
            ..Default::default()
        };
        let mut net = EmbedderNetwork::new(cfg).unwrap();
        // non-zero biases so bias gradients are exercised away from init
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in net.params_mut().iter_mut().skip(1).step_by(2) {
            t.iter_mut().for_each(|b| *b = rng.gen_range(-0.05..0.05));
        }
        let inputs: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..64).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let labels = [0, 0, 0, 0, 1, 1, 1, 1];
        let margin = 0.5;
        let traces: Vec<_> = inputs.iter().map(|x| net.forward(x).unwrap()).collect();
        let e: Vec<Vec<f64>> = traces.iter().map(|t| t.embedding.clone()).collect();
        let triplets = semi_hard_triplets(&e, &labels, margin).unwrap();
        let (loss, ge) = batch_triplet_loss(&e, &triplets, margin);
        assert!(loss > 0.0);
        let mut analytic = net.zero_grads();
        for (t, g) in traces.iter().zip(&ge) {
            net.backward(t, g, &mut analytic).unwrap();
        }

        let h = 1e-6;
        let mut checked = 0;
        let mut worst: f64 = 0.0;
        while checked < 150 {
            let ti = rng.gen_range(0..net.params().len());
            let ci = rng.gen_range(0..net.params()[ti].len());
            let orig = net.params()[ti][ci];
            net.params_mut()[ti][ci] = orig + h;
            let up = batch_objective(&net, &inputs, &triplets, margin);
            net.params_mut()[ti][ci] = orig - h;
            let down = batch_objective(&net, &inputs, &triplets, margin);
            net.params_mut()[ti][ci] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[ti][ci];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max(rel);
            checked += 1;
        }
        assert!(worst <= 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn batch_loss_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let e: Vec<Vec<f64>> = (0..10)
                .map(|_| {
                    let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / n).collect()
                })
                .collect();
            let labels: Vec<usize> = (0..10).map(|i| i % 3).collect();
            let t = semi_hard_triplets(&e, &labels, 0.2).unwrap();
            let (loss, _) = batch_triplet_loss(&e, &t, 0.2);
            assert!((0.0..=2.2).contains(&loss));
        }
    }

    #[test]
    fn loss_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loss.csv");
        let h = vec![
            EpochLoss {
                epoch: 0,
                train_loss: 0.5,
                val_loss: 0.4,
            },
            EpochLoss {
                epoch: 1,
                train_loss: 0.3,
                val_loss: 0.2,
            },
        ];
        write_loss_history(&h, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "epoch,train_loss,val_loss\n0,0.5,0.4\n1,0.3,0.2\n");
    }
}
