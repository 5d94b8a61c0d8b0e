//! Recovering labels and SNRs from embeddings.
//!
//! Categorical route: nearest centroid over per-label mean embeddings.
//! Regression route: KNN over linear SNR ratios (noise = 0), converted back
//! to dB with zero predictions floored, then scored by RMSDE.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::SnrLabel;

pub const DEFAULT_ZERO_FLOOR_DB: f64 = -40.0;
const INVERSE_DISTANCE_EPS: f64 = 1e-12;

pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(ratio)`, with a ratio of exactly zero mapped to `zero_floor_db`.
pub fn linear_to_snr_db(ratio: f64, zero_floor_db: f64) -> Result<f64> {
    if ratio < 0.0 || ratio.is_nan() {
        return Err(Error::NegativeRatio(ratio));
    }
    if ratio == 0.0 {
        return Ok(zero_floor_db);
    }
    Ok(10.0 * ratio.log10())
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// One mean embedding per label, kept in ascending label order.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSet {
    pub labels: Vec<SnrLabel>,
    pub centroids: Vec<Vec<f64>>,
}

pub fn compute_centroids(embeddings: &[Vec<f64>], labels: &[SnrLabel]) -> Result<CentroidSet> {
    if embeddings.len() != labels.len() {
        return Err(Error::Mismatch(format!(
            "{} embeddings vs {} labels",
            embeddings.len(),
            labels.len()
        )));
    }
    if embeddings.is_empty() {
        return Err(Error::EmptyInput("no embeddings to average"));
    }
    let dim = embeddings[0].len();
    let mut sums: BTreeMap<SnrLabel, (Vec<f64>, usize)> = BTreeMap::new();
    for (e, &label) in embeddings.iter().zip(labels) {
        if e.len() != dim {
            return Err(Error::ShapeMismatch(
                "embeddings differ in dimension".into(),
            ));
        }
        let (sum, count) = sums.entry(label).or_insert_with(|| (vec![0.0; dim], 0));
        sum.iter_mut().zip(e).for_each(|(s, v)| *s += v);
        *count += 1;
    }
    let (labels, centroids) = sums
        .into_iter()
        .map(|(label, (sum, count))| (label, sum.into_iter().map(|s| s / count as f64).collect()))
        .unzip();
    Ok(CentroidSet { labels, centroids })
}

impl CentroidSet {
    /// Label of the nearest centroid; ties go to the lower label.
    pub fn nc_predict(&self, query: &[f64]) -> Result<SnrLabel> {
        if self.centroids.is_empty() {
            return Err(Error::EmptyInput("centroid set is empty"));
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            if c.len() != query.len() {
                return Err(Error::ShapeMismatch(format!(
                    "query of dimension {} vs centroids of {}",
                    query.len(),
                    c.len()
                )));
            }
            let d = squared_distance(c, query);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(self.labels[best])
    }
}

pub fn nc_predict(centroids: &CentroidSet, query: &[f64]) -> Result<SnrLabel> {
    centroids.nc_predict(query)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
    pub weighting: Weighting,
    pub zero_floor_db: f64,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 5,
            weighting: Weighting::InverseDistance,
            zero_floor_db: DEFAULT_ZERO_FLOOR_DB,
        }
    }
}

/// Reference embeddings with their linear SNR values.
#[derive(Debug, Clone)]
pub struct KnnRegressor {
    embeddings: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl KnnRegressor {
    pub fn new(embeddings: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if embeddings.len() != values.len() {
            return Err(Error::Mismatch(format!(
                "{} references vs {} values",
                embeddings.len(),
                values.len()
            )));
        }
        if embeddings.is_empty() {
            return Err(Error::EmptyInput("KNN needs references"));
        }
        Ok(Self { embeddings, values })
    }

    /// References labelled by [`SnrLabel`]; noise enters with ratio 0.
    pub fn from_labels(embeddings: Vec<Vec<f64>>, labels: &[SnrLabel]) -> Result<Self> {
        Self::new(embeddings, labels.iter().map(SnrLabel::linear).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `k` nearest references as `(distance, index)`, ordered by
    /// distance then index.
    pub fn neighbors(&self, query: &[f64], k: usize) -> Result<Vec<(f64, usize)>> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if k > self.len() {
            return Err(Error::KTooLarge {
                k,
                available: self.len(),
            });
        }
        let mut scored: Vec<(f64, usize)> = self
            .embeddings
            .iter()
            .enumerate()
            .map(|(i, e)| (squared_distance(e, query), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        Ok(scored.into_iter().map(|(d2, i)| (d2.sqrt(), i)).collect())
    }

    /// Predicted linear SNR.
    pub fn predict(&self, query: &[f64], cfg: &KnnConfig) -> Result<f64> {
        let nn = self.neighbors(query, cfg.k)?;
        Ok(weighted_value(&nn, &self.values, cfg.weighting))
    }

    pub fn predict_db(&self, query: &[f64], cfg: &KnnConfig) -> Result<f64> {
        linear_to_snr_db(self.predict(query, cfg)?, cfg.zero_floor_db)
    }
}

fn weighted_value(neighbors: &[(f64, usize)], values: &[f64], weighting: Weighting) -> f64 {
    match weighting {
        Weighting::Uniform => {
            neighbors.iter().map(|&(_, i)| values[i]).sum::<f64>() / neighbors.len() as f64
        }
        Weighting::InverseDistance => {
            let (mut num, mut den) = (0.0, 0.0);
            for &(d, i) in neighbors {
                let w = 1.0 / (d + INVERSE_DISTANCE_EPS);
                num += w * values[i];
                den += w;
            }
            num / den
        }
    }
}

pub fn knn_predict_snr(refs: &KnnRegressor, query: &[f64], cfg: &KnnConfig) -> Result<f64> {
    refs.predict(query, cfg)
}

/// Root mean square of `predicted − actual`, both in dB.
pub fn rmsde(predicted_db: &[f64], actual_db: &[f64]) -> Result<f64> {
    if predicted_db.len() != actual_db.len() {
        return Err(Error::Mismatch(format!(
            "{} predictions vs {} actuals",
            predicted_db.len(),
            actual_db.len()
        )));
    }
    if predicted_db.is_empty() {
        return Err(Error::EmptyInput("rmsde over no samples"));
    }
    let sq: f64 = predicted_db
        .iter()
        .zip(actual_db)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sq / predicted_db.len() as f64).sqrt())
}

/// Fraction of samples whose predicted noise/not-noise status matches.
pub fn noise_binary_accuracy(predictions: &[SnrLabel], actual_is_noise: &[bool]) -> Result<f64> {
    if predictions.len() != actual_is_noise.len() {
        return Err(Error::Mismatch(format!(
            "{} predictions vs {} flags",
            predictions.len(),
            actual_is_noise.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("accuracy over no samples"));
    }
    let hits = predictions
        .iter()
        .zip(actual_is_noise)
        .filter(|(p, &n)| p.is_noise() == n)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Fraction of predictions equal to the expected label.
pub fn label_accuracy(predictions: &[SnrLabel], expected: SnrLabel) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("accuracy over no samples"));
    }
    let hits = predictions.iter().filter(|&&p| p == expected).count();
    Ok(hits as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    pub k: usize,
    pub rmse: f64,
    pub r2: f64,
    /// Largest query-to-k-th-neighbour distance over the validation set.
    pub max_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowSelection {
    pub chosen_k: usize,
    pub curve: Vec<ElbowPoint>,
}

/// Index of the knee of `ys` over increasing `xs`: the point farthest from
/// the chord joining the first and last points, after scaling both axes to
/// [0, 1]. A curve with no point off the chord gives index 0, as do ties
/// (the first maximum wins).
pub fn find_knee(xs: &[f64], ys: &[f64]) -> Result<usize> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch("knee curve axes differ in length".into()));
    }
    if xs.is_empty() {
        return Err(Error::EmptyInput("knee search over an empty curve"));
    }
    let n = xs.len();
    if n < 3 {
        return Ok(0);
    }
    let norm = |v: &[f64]| -> Vec<f64> {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        v.iter()
            .map(|x| if span > 0.0 { (x - lo) / span } else { 0.0 })
            .collect()
    };
    let x = norm(xs);
    let y = norm(ys);
    let (dx, dy) = (x[n - 1] - x[0], y[n - 1] - y[0]);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return Ok(0);
    }
    let mut best = 0;
    let mut best_d = 0.0;
    for i in 0..n {
        let d = ((x[i] - x[0]) * dy - (y[i] - y[0]) * dx).abs() / len;
        if d > best_d + 1e-12 {
            best_d = d;
            best = i;
        }
    }
    Ok(best)
}

/// Sweeps `k_range`, computing RMSE and R² of the KNN-predicted linear SNR
/// on the validation set and the largest neighbour distance, then picks the
/// knee of the RMSE curve.
pub fn select_k_elbow(
    refs: &KnnRegressor,
    validation: &[Vec<f64>],
    validation_values: &[f64],
    k_range: RangeInclusive<usize>,
    weighting: Weighting,
) -> Result<ElbowSelection> {
    let (k_lo, k_hi) = (*k_range.start().max(&1), *k_range.end());
    if k_range.is_empty() || k_lo > k_hi {
        return Err(Error::InvalidParameter("k range is empty".into()));
    }
    if k_hi > refs.len() {
        return Err(Error::KTooLarge {
            k: k_hi,
            available: refs.len(),
        });
    }
    if validation.len() != validation_values.len() {
        return Err(Error::Mismatch("validation embeddings vs values".into()));
    }
    if validation.is_empty() {
        return Err(Error::EmptyInput("validation set is empty"));
    }
    let ks: Vec<usize> = (k_lo..=k_hi).collect();
    // per query: prediction and k-th distance for every k in the sweep
    let per_query = validation
        .par_iter()
        .map(|q| {
            let nn = refs.neighbors(q, k_hi)?;
            let mut preds = Vec::with_capacity(ks.len());
            let mut kth = Vec::with_capacity(ks.len());
            let (mut sum_u, mut num_w, mut den_w) = (0.0, 0.0, 0.0);
            for (j, &(d, i)) in nn.iter().enumerate() {
                let v = refs.values[i];
                sum_u += v;
                let w = 1.0 / (d + INVERSE_DISTANCE_EPS);
                num_w += w * v;
                den_w += w;
                let k = j + 1;
                if k >= k_lo {
                    preds.push(match weighting {
                        Weighting::Uniform => sum_u / k as f64,
                        Weighting::InverseDistance => num_w / den_w,
                    });
                    kth.push(d);
                }
            }
            Ok((preds, kth))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = validation.len() as f64;
    let mean = validation_values.iter().sum::<f64>() / n;
    let ss_tot: f64 = validation_values.iter().map(|v| (v - mean).powi(2)).sum();
    let curve: Vec<ElbowPoint> = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let mut ss_res = 0.0;
            let mut max_dist = 0.0f64;
            for (q, (preds, kth)) in per_query.iter().enumerate() {
                ss_res += (preds[j] - validation_values[q]).powi(2);
                max_dist = max_dist.max(kth[j]);
            }
            ElbowPoint {
                k,
                rmse: (ss_res / n).sqrt(),
                r2: if ss_tot > 0.0 {
                    1.0 - ss_res / ss_tot
                } else {
                    0.0
                },
                max_dist,
            }
        })
        .collect();
    let xs: Vec<f64> = curve.iter().map(|p| p.k as f64).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.rmse).collect();
    let knee = find_knee(&xs, &ys)?;
    Ok(ElbowSelection {
        chosen_k: curve[knee].k,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn db_conversions() {
        assert_eq!(snr_db_to_linear(-10.0), 0.1);
        assert_eq!(snr_db_to_linear(0.0), 1.0);
        assert_eq!(linear_to_snr_db(0.0, DEFAULT_ZERO_FLOOR_DB).unwrap(), -40.0);
        assert_eq!(linear_to_snr_db(0.1, DEFAULT_ZERO_FLOOR_DB).unwrap(), -10.0);
        assert!(matches!(
            linear_to_snr_db(-0.5, -40.0),
            Err(Error::NegativeRatio(_))
        ));
    }

    #[test]
    fn centroid_examples() {
        let e = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![5.0, 5.0]];
        let l = vec![SnrLabel::Noise, SnrLabel::Noise, SnrLabel::Decibel(3.0)];
        let c = compute_centroids(&e, &l).unwrap();
        assert_eq!(c.labels, vec![SnrLabel::Noise, SnrLabel::Decibel(3.0)]);
        assert_eq!(c.centroids[0], vec![1.0, 0.0]);
        assert_eq!(c.centroids[1], vec![5.0, 5.0]);
        assert!(compute_centroids(&[], &[]).is_err());
    }

    #[test]
    fn nc_examples() {
        let set = CentroidSet {
            labels: vec![SnrLabel::Decibel(-5.0), SnrLabel::Decibel(0.0)],
            centroids: vec![vec![0.0, 0.0], vec![2.0, 0.0]],
        };
        assert_eq!(
            set.nc_predict(&[0.4, 0.0]).unwrap(),
            SnrLabel::Decibel(-5.0)
        );
        assert_eq!(set.nc_predict(&[2.0, 0.0]).unwrap(), SnrLabel::Decibel(0.0));
        assert_eq!(
            set.nc_predict(&[1.0, 3.0]).unwrap(),
            SnrLabel::Decibel(-5.0)
        );

        let with_noise = compute_centroids(
            &[vec![1.0], vec![-1.0]],
            &[SnrLabel::Decibel(-15.0), SnrLabel::Noise],
        )
        .unwrap();
        assert_eq!(with_noise.nc_predict(&[0.0]).unwrap(), SnrLabel::Noise);

        let empty = CentroidSet {
            labels: vec![],
            centroids: vec![],
        };
        assert!(empty.nc_predict(&[0.0]).is_err());
        assert!(set.nc_predict(&[0.0]).is_err());
    }

    #[test]
    fn knn_examples() {
        let refs = KnnRegressor::new(vec![vec![1.0], vec![-3.0], vec![10.0]], vec![0.1, 0.4, 9.0])
            .unwrap();
        let q = [0.0];
        let uni = KnnConfig {
            k: 1,
            weighting: Weighting::Uniform,
            ..Default::default()
        };
        assert_eq!(refs.predict(&q, &uni).unwrap(), 0.1);
        let two_uni = KnnConfig { k: 2, ..uni };
        assert!((refs.predict(&q, &two_uni).unwrap() - 0.25).abs() < 1e-15);
        let two_w = KnnConfig {
            k: 2,
            weighting: Weighting::InverseDistance,
            ..Default::default()
        };
        assert!((refs.predict(&q, &two_w).unwrap() - 0.175).abs() < 1e-9);
        assert!(matches!(
            refs.predict(&q, &KnnConfig { k: 4, ..uni }),
            Err(Error::KTooLarge { k: 4, available: 3 })
        ));
        // exact match dominates
        let exact = refs.predict(&[10.0], &KnnConfig { k: 3, ..two_w }).unwrap();
        assert!((exact - 9.0).abs() < 1e-9);
    }

    #[test]
    fn rmsde_examples() {
        assert_eq!(rmsde(&[1.0, -5.0], &[1.0, -5.0]).unwrap(), 0.0);
        let floored = linear_to_snr_db(0.0, DEFAULT_ZERO_FLOOR_DB).unwrap();
        assert_eq!(rmsde(&[floored], &[-15.0]).unwrap(), 25.0);
        assert!((rmsde(&[3.0, -3.0], &[0.0, 0.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!(rmsde(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn noise_accuracy_examples() {
        let p = [SnrLabel::Noise, SnrLabel::Decibel(3.0)];
        assert_eq!(noise_binary_accuracy(&p, &[true, false]).unwrap(), 1.0);
        assert_eq!(noise_binary_accuracy(&p, &[true, true]).unwrap(), 0.5);
        assert!(noise_binary_accuracy(&p, &[true]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let preds: Vec<SnrLabel> = (0..300)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    SnrLabel::Noise
                } else {
                    SnrLabel::Decibel(0.0)
                }
            })
            .collect();
        let flags: Vec<bool> = (0..300).map(|_| rng.gen_bool(0.5)).collect();
        let mut hits = 0;
        for i in 0..300 {
            if preds[i].is_noise() == flags[i] {
                hits += 1;
            }
        }
        let acc = noise_binary_accuracy(&preds, &flags).unwrap();
        assert!((acc - hits as f64 / 300.0).abs() <= 1e-12);
    }

    #[test]
    fn knee_examples() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&k| {
                if k <= 50.0 {
                    10.0 - 0.18 * (k - 1.0)
                } else {
                    1.18 - 0.0005 * (k - 50.0)
                }
            })
            .collect();
        assert_eq!(xs[find_knee(&xs, &ys).unwrap()], 50.0);

        let linear: Vec<f64> = xs.iter().map(|k| 5.0 - 0.001 * k).collect();
        assert_eq!(find_knee(&xs, &linear).unwrap(), 0);
        assert_eq!(find_knee(&[7.0], &[1.0]).unwrap(), 0);
        assert!(find_knee(&[], &[]).is_err());
    }

    #[test]
    fn elbow_on_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut e = Vec::new();
        let mut v = Vec::new();
        for c in 0..4 {
            for _ in 0..30 {
                e.push(vec![
                    c as f64 * 5.0 + rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                ]);
                v.push(c as f64);
            }
        }
        let refs = KnnRegressor::new(e.clone(), v.clone()).unwrap();
        let sel = select_k_elbow(&refs, &e, &v, 1..=120, Weighting::Uniform).unwrap();
        assert_eq!(sel.curve.len(), 120);
        assert!(sel.curve.iter().all(|p| p.rmse.is_finite() && p.r2 <= 1.0));
        let single = select_k_elbow(&refs, &e, &v, 7..=7, Weighting::Uniform).unwrap();
        assert_eq!(single.chosen_k, 7);
        assert!(select_k_elbow(&refs, &e, &v, 5..=4, Weighting::Uniform).is_err());
        assert!(select_k_elbow(&refs, &e, &v, 1..=121, Weighting::Uniform).is_err());
        // curve values agree with direct prediction
        let cfg = KnnConfig {
            k: 10,
            weighting: Weighting::Uniform,
            ..Default::default()
        };
        let direct: f64 = e
            .iter()
            .zip(&v)
            .map(|(q, t)| (refs.predict(q, &cfg).unwrap() - t).powi(2))
            .sum::<f64>();
        assert!(((direct / 120.0).sqrt() - sel.curve[9].rmse).abs() < 1e-12);
    }

    #[test]
    fn knn_full_k_is_global_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let v: Vec<f64> = (0..40).map(|_| rng.gen()).collect();
        let refs = KnnRegressor::new(e, v.clone()).unwrap();
        let cfg = KnnConfig {
            k: 40,
            weighting: Weighting::Uniform,
            ..Default::default()
        };
        let mean = v.iter().sum::<f64>() / 40.0;
        assert!((refs.predict(&[0.3, 0.3], &cfg).unwrap() - mean).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn db_round_trip(d in -40.0f64..10.0) {
            let back = linear_to_snr_db(snr_db_to_linear(d), -40.0).unwrap();
            prop_assert!((back - d).abs() <= 1e-9);
        }

        #[test]
        fn rmsde_permutation_invariant(
            pairs in prop::collection::vec((-40.0f64..10.0, -15.0f64..10.0), 1..50),
            rot in 0usize..50,
        ) {
            let (p, a): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
            let base = rmsde(&p, &a).unwrap();
            prop_assert!(base >= 0.0);
            let r = rot % p.len();
            let mut p2 = p.clone();
            let mut a2 = a.clone();
            p2.rotate_left(r);
            a2.rotate_left(r);
            prop_assert!((rmsde(&p2, &a2).unwrap() - base).abs() <= 1e-12);
        }

        #[test]
        fn translation_invariance(seed in 0u64..200, shift in -5.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let labels: Vec<SnrLabel> = (0..30).map(|i| if i % 3 == 0 { SnrLabel::Noise } else { SnrLabel::Decibel((i % 3) as f64) }).collect();
            let q = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let moved: Vec<Vec<f64>> = e.iter().map(|p| p.iter().map(|x| x + shift).collect()).collect();
            let qm: Vec<f64> = q.iter().map(|x| x + shift).collect();
            let c1 = compute_centroids(&e, &labels).unwrap();
            let c2 = compute_centroids(&moved, &labels).unwrap();
            prop_assert_eq!(c1.nc_predict(&q).unwrap(), c2.nc_predict(&qm).unwrap());
            let r1 = KnnRegressor::from_labels(e, &labels).unwrap();
            let r2 = KnnRegressor::from_labels(moved, &labels).unwrap();
            let cfg = KnnConfig { k: 5, weighting: Weighting::Uniform, ..Default::default() };
            let n1: Vec<usize> = r1.neighbors(&q, 5).unwrap().iter().map(|x| x.1).collect();
            let n2: Vec<usize> = r2.neighbors(&qm, 5).unwrap().iter().map(|x| x.1).collect();
            prop_assert_eq!(n1, n2);
            prop_assert!((r1.predict(&q, &cfg).unwrap() - r2.predict(&qm, &cfg).unwrap()).abs() < 1e-12);
        }
    }
}
