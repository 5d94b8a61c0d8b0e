use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::EmbedderConfig;
use super::network::EmbedderNetwork;
use super::train::{train, LabeledInputs};
use crate::error::{Error, Result};

/// Inclusive ranges for the searched hyperparameters. Learning rate is
/// sampled log-uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub conv_blocks: (usize, usize),
    pub dense_layers: (usize, usize),
    pub learning_rate: (f64, f64),
    pub embedding_dim: (usize, usize),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            conv_blocks: (2, 4),
            dense_layers: (1, 2),
            learning_rate: (1e-4, 1e-2),
            embedding_dim: (8, 32),
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        let (lr_lo, lr_hi) = self.learning_rate;
        if self.conv_blocks.0 > self.conv_blocks.1
            || self.dense_layers.0 > self.dense_layers.1
            || self.embedding_dim.0 > self.embedding_dim.1
            || !(lr_lo > 0.0 && lr_lo <= lr_hi && lr_hi.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "empty search space {self:?}"
            )));
        }
        Ok(())
    }

    pub fn sample(&self, base: &EmbedderConfig, rng: &mut ChaCha8Rng) -> EmbedderConfig {
        let (lo, hi) = self.learning_rate;
        let lr = if lo == hi {
            lo
        } else {
            (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
        };
        EmbedderConfig {
            conv_blocks: rng.gen_range(self.conv_blocks.0..=self.conv_blocks.1),
            dense_layers: rng.gen_range(self.dense_layers.0..=self.dense_layers.1),
            embedding_dim: rng.gen_range(self.embedding_dim.0..=self.embedding_dim.1),
            learning_rate: lr,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config: EmbedderConfig,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: EmbedderConfig,
    pub best_val_loss: f64,
    pub trials: Vec<Trial>,
}

/// Seeded random search ranked by final validation loss. Trials that fail
/// (collapse, divergence) are recorded with infinite loss; ties keep the
/// earlier trial.
pub fn hyper_search(
    space: &SearchSpace,
    base: &EmbedderConfig,
    budget: usize,
    seed: u64,
    train_set: &LabeledInputs,
    val_set: &LabeledInputs,
) -> Result<SearchOutcome> {
    space.validate()?;
    if budget == 0 {
        return Err(Error::InvalidParameter(
            "search budget must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(budget);
    for _ in 0..budget {
        let config = space.sample(base, &mut rng);
        let val_loss = match EmbedderNetwork::new(config.clone()) {
            Ok(mut net) => match train(&mut net, train_set, val_set) {
                Ok(out) => out.final_val_loss(),
                Err(Error::Divergence(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            },
            Err(Error::SpatialCollapse { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        log::info!("trial {}: val loss {val_loss:.4}", trials.len());
        trials.push(Trial { config, val_loss });
    }
    let best = trials.iter().fold(
        &trials[0],
        |b, t| if t.val_loss < b.val_loss { t } else { b },
    );
    Ok(SearchOutcome {
        best: best.config.clone(),
        best_val_loss: best.val_loss,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, seed: u64) -> LabeledInputs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = LabeledInputs::default();
        for i in 0..n {
            let label = i % 2;
            set.inputs.push(
                (0..64)
                    .map(|p| {
                        let on = (p % 8 < 4) == (label == 0);
                        (if on { 0.7 } else { 0.2 }) + rng.gen_range(-0.1..0.1)
                    })
                    .collect(),
            );
            set.labels.push(label);
        }
        set
    }

    fn base() -> EmbedderConfig {
        EmbedderConfig {
            input_shape: (8, 8),
            batch_size: 8,
            epochs: 5,
            ..Default::default()
        }
    }

    fn small_space() -> SearchSpace {
        SearchSpace {
            conv_blocks: (1, 3),
            dense_layers: (1, 2),
            learning_rate: (1e-4, 3e-2),
            embedding_dim: (2, 6),
        }
    }

    #[test]
    fn budget_one_returns_sampled_config() {
        let (tr, va) = (toy(24, 1), toy(12, 2));
        let out = hyper_search(&small_space(), &base(), 1, 9, &tr, &va).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(out.best, small_space().sample(&base(), &mut rng));
        assert_eq!(out.trials.len(), 1);
    }

    #[test]
    fn single_point_space() {
        let space = SearchSpace {
            conv_blocks: (2, 2),
            dense_layers: (1, 1),
            learning_rate: (1e-3, 1e-3),
            embedding_dim: (4, 4),
        };
        let out = hyper_search(&space, &base(), 2, 0, &toy(24, 1), &toy(12, 2)).unwrap();
        assert_eq!(out.best.conv_blocks, 2);
        assert_eq!(out.best.dense_layers, 1);
        assert_eq!(out.best.learning_rate, 1e-3);
        assert_eq!(out.best.embedding_dim, 4);
    }

    #[test]
    fn best_beats_median_and_is_deterministic() {
        let (tr, va) = (toy(24, 1), toy(12, 2));
        let out = hyper_search(&small_space(), &base(), 8, 4, &tr, &va).unwrap();
        let mut losses: Vec<f64> = out.trials.iter().map(|t| t.val_loss).collect();
        losses.sort_by(f64::total_cmp);
        let median = 0.5 * (losses[3] + losses[4]);
        assert!(out.best_val_loss <= median);
        let again = hyper_search(&small_space(), &base(), 8, 4, &tr, &va).unwrap();
        assert_eq!(out.trials, again.trials);
    }

    #[test]
    fn rejects_empty_space_and_zero_budget() {
        let (tr, va) = (toy(8, 1), toy(8, 2));
        let bad = SearchSpace {
            conv_blocks: (3, 2),
            ..small_space()
        };
        assert!(hyper_search(&bad, &base(), 1, 0, &tr, &va).is_err());
        assert!(hyper_search(&small_space(), &base(), 0, 0, &tr, &va).is_err());
    }
}
