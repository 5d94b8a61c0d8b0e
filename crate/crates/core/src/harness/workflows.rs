use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::data::{prepare_inputs, Dataset};
use super::report::{flag_loss_outliers, EvalReport, LevelFailure};
use super::source::SampleSource;
use crate::embedder::{train, EmbedderConfig, EmbedderNetwork, EpochLoss, LabeledInputs};
use crate::error::{Error, Result};
use crate::inference::{
    compute_centroids, label_accuracy, rmsde, select_k_elbow, CentroidSet, ElbowSelection,
    KnnRegressor, Weighting,
};
use crate::label::SnrLabel;
use crate::metrics::{evaluate_snr_level, Method, References};
use crate::synth::Split;
use crate::viz::{tsne_project, Projection2D};

/// The configuration actually used against `dataset`: its on-disk build
/// settings replace whatever the experiment file said.
pub fn resolved_config(dataset: &Dataset, cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        dataset: dataset.config.clone(),
        ..cfg.clone()
    }
}

fn base_report(
    dataset: &Dataset,
    source: Option<&SampleSource>,
    cfg: &ExperimentConfig,
    workflow: &str,
) -> Result<EvalReport> {
    let mut report = EvalReport::default();
    let meta = &mut report.metadata;
    meta.config = Some(resolved_config(dataset, cfg));
    meta.workflows.push(workflow.to_string());
    meta.seeds.insert("dataset".into(), dataset.config.seed);
    meta.seeds.insert("embedder".into(), cfg.embedder.seed);
    meta.seeds.insert("tsne".into(), cfg.tsne.seed);
    if let Some(source) = source {
        if let SampleSource::Simulator(sim) = source {
            meta.seeds.insert("source".into(), sim.seed);
        }
        meta.source = Some(source.describe());
    }
    meta.manifest_digest = Some(dataset.digest()?);
    Ok(report)
}

fn level_db(level: SnrLabel) -> f64 {
    level.db().expect("grid levels carry a dB value")
}

/// Builds references from each level's training whistles and the training
/// noise, then scores the source's clips for that level.
pub fn run_spectral_workflow(
    dataset: &Dataset,
    source: &SampleSource,
    method: Method,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let name = match method {
        Method::Frequency => "spectral-frequency",
        Method::Pixels => "spectral-pixels",
    };
    let mut report = base_report(dataset, Some(source), cfg, name)?;
    let noise = dataset.clips(SnrLabel::Noise, Split::Train)?;
    for level in dataset.levels() {
        let whistles = dataset.clips(level, Split::Train)?;
        let refs = References::build(method, &whistles, &noise, cfg.n_fft, cfg.stft)?;
        let samples = source.clips(level, &dataset.config.synth)?;
        let scored = evaluate_snr_level(level, &samples, &refs)?;
        let rec = report.record_mut(level_db(level));
        match method {
            Method::Frequency => rec.frequency_score = Some(scored.mean_score),
            Method::Pixels => rec.pixel_score = Some(scored.mean_score),
        }
        rec.n_samples = scored.n_samples;
    }
    Ok(report)
}

fn inputs_for(
    dataset: &Dataset,
    label: SnrLabel,
    split: Split,
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<f64>>> {
    prepare_inputs(
        &dataset.clips(label, split)?,
        &cfg.stft,
        cfg.embedder.input_shape,
    )
}

fn source_inputs(
    dataset: &Dataset,
    source: &SampleSource,
    level: SnrLabel,
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<f64>>> {
    let clips = source.clips(level, &dataset.config.synth)?;
    prepare_inputs(&clips, &cfg.stft, cfg.embedder.input_shape)
}

pub fn embed_all(net: &EmbedderNetwork, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    inputs
        .par_iter()
        .map(|x| Ok(net.forward(x)?.embedding))
        .collect()
}

fn labeled(parts: Vec<(Vec<Vec<f64>>, usize)>) -> LabeledInputs {
    let mut set = LabeledInputs::default();
    for (inputs, label) in parts {
        set.labels.extend(std::iter::repeat_n(label, inputs.len()));
        set.inputs.extend(inputs);
    }
    set
}

/// Outcome of training one level's whistle-vs-noise network.
#[derive(Debug, Clone)]
pub struct LevelModel {
    pub snr_db: f64,
    pub outcome: std::result::Result<(EmbedderNetwork, Vec<EpochLoss>), String>,
}

fn per_level_config(cfg: &ExperimentConfig) -> EmbedderConfig {
    EmbedderConfig {
        target_val_loss: cfg.per_snr_target_loss,
        ..cfg.embedder.clone()
    }
}

/// One network per grid level, trained on that level's whistles against
/// the shared noise class. Numeric failures are kept per level.
pub fn train_per_snr(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<LevelModel>> {
    let noise_train = inputs_for(dataset, SnrLabel::Noise, Split::Train, cfg)?;
    let noise_val = inputs_for(dataset, SnrLabel::Noise, Split::Val, cfg)?;
    let net_cfg = per_level_config(cfg);
    dataset
        .levels()
        .par_iter()
        .map(|&level| {
            let train_set = labeled(vec![
                (noise_train.clone(), 0),
                (inputs_for(dataset, level, Split::Train, cfg)?, 1),
            ]);
            let val_set = labeled(vec![
                (noise_val.clone(), 0),
                (inputs_for(dataset, level, Split::Val, cfg)?, 1),
            ]);
            let mut net = EmbedderNetwork::new(net_cfg.clone())?;
            let outcome = match train(&mut net, &train_set, &val_set) {
                Ok(out) => Ok((net, out.history)),
                Err(e @ (Error::Divergence(_) | Error::NonFiniteGradient)) => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(LevelModel {
                snr_db: level_db(level),
                outcome,
            })
        })
        .collect()
}

/// Nearest-centroid whistle/noise labelling of each level's source clips
/// with that level's own network.
pub fn evaluate_per_snr(
    models: &[LevelModel],
    dataset: &Dataset,
    source: &SampleSource,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let mut report = base_report(dataset, Some(source), cfg, "individual-snn")?;
    let noise_train = inputs_for(dataset, SnrLabel::Noise, Split::Train, cfg)?;
    let results = models
        .par_iter()
        .map(|m| -> Result<Option<(usize, f64)>> {
            let (net, _) = match &m.outcome {
                Ok(ok) => ok,
                Err(_) => return Ok(None),
            };
            let level = SnrLabel::Decibel(m.snr_db);
            let whistle = embed_all(net, &inputs_for(dataset, level, Split::Train, cfg)?)?;
            let noise = embed_all(net, &noise_train)?;
            let mut labels = vec![SnrLabel::Noise; noise.len()];
            labels.extend(std::iter::repeat_n(level, whistle.len()));
            let centroids = compute_centroids(&[noise, whistle].concat(), &labels)?;
            let candidates = embed_all(net, &source_inputs(dataset, source, level, cfg)?)?;
            let preds = nc_all(&centroids, &candidates)?;
            Ok(Some((candidates.len(), label_accuracy(&preds, level)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    for (m, result) in models.iter().zip(results) {
        let rec = report.record_mut(m.snr_db);
        match (&m.outcome, result) {
            (Ok((_, history)), Some((n, acc))) => {
                rec.individual_nc_accuracy = Some(acc);
                rec.n_samples = n;
                rec.final_loss = history.last().map(|e| e.val_loss);
                report.losses.insert(
                    format!("snn_{}", SnrLabel::Decibel(m.snr_db).tag()),
                    history.clone(),
                );
            }
            (Err(msg), _) => report.failures.push(LevelFailure {
                snr_db: m.snr_db,
                error: msg.clone(),
            }),
            (Ok(_), None) => unreachable!("trained levels are always evaluated"),
        }
    }
    flag_loss_outliers(&mut report.records);
    Ok(report)
}

pub fn run_individual_snn_workflow(
    dataset: &Dataset,
    source: &SampleSource,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let models = train_per_snr(dataset, cfg)?;
    evaluate_per_snr(&models, dataset, source, cfg)
}

fn nc_all(centroids: &CentroidSet, queries: &[Vec<f64>]) -> Result<Vec<SnrLabel>> {
    queries
        .par_iter()
        .map(|q| centroids.nc_predict(q))
        .collect()
}

/// All dataset classes in label order, each with a class index.
fn classes(dataset: &Dataset) -> Vec<SnrLabel> {
    dataset.manifest.labels()
}

/// One network over every level plus noise.
pub fn train_single(
    dataset: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<(EmbedderNetwork, Vec<EpochLoss>)> {
    let classes = classes(dataset);
    let gather = |split: Split| -> Result<LabeledInputs> {
        let mut parts = Vec::with_capacity(classes.len());
        for (i, &label) in classes.iter().enumerate() {
            parts.push((inputs_for(dataset, label, split, cfg)?, i));
        }
        Ok(labeled(parts))
    };
    let train_set = gather(Split::Train)?;
    let val_set = gather(Split::Val)?;
    let mut net = EmbedderNetwork::new(cfg.embedder.clone())?;
    let out = train(&mut net, &train_set, &val_set)?;
    Ok((net, out.history))
}

/// Embeddings of every class for one split, grouped by label.
pub fn embed_split(
    net: &EmbedderNetwork,
    dataset: &Dataset,
    split: Split,
    cfg: &ExperimentConfig,
) -> Result<Vec<(SnrLabel, Vec<Vec<f64>>)>> {
    classes(dataset)
        .into_iter()
        .map(|label| {
            Ok((
                label,
                embed_all(net, &inputs_for(dataset, label, split, cfg)?)?,
            ))
        })
        .collect()
}

fn flatten(groups: &[(SnrLabel, Vec<Vec<f64>>)]) -> (Vec<Vec<f64>>, Vec<SnrLabel>) {
    let mut e = Vec::new();
    let mut l = Vec::new();
    for (label, embs) in groups {
        e.extend(embs.iter().cloned());
        l.extend(std::iter::repeat_n(*label, embs.len()));
    }
    (e, l)
}

/// Elbow sweep of weighted KNN over `k ∈ [1, min(k_max, references)]`,
/// with training embeddings as references and validation embeddings as
/// queries.
pub fn select_k(
    refs: &KnnRegressor,
    val: &[(SnrLabel, Vec<Vec<f64>>)],
    cfg: &ExperimentConfig,
) -> Result<ElbowSelection> {
    let (queries, labels) = flatten(val);
    let values: Vec<f64> = labels.iter().map(|l| l.linear()).collect();
    let k_max = cfg.knn.k_max.min(refs.len());
    select_k_elbow(
        refs,
        &queries,
        &values,
        1..=k_max,
        Weighting::InverseDistance,
    )
}

fn capped(
    groups: &[(SnrLabel, Vec<Vec<f64>>)],
    per_label: usize,
) -> (Vec<Vec<f64>>, Vec<SnrLabel>) {
    let trimmed: Vec<(SnrLabel, Vec<Vec<f64>>)> = groups
        .iter()
        .map(|(l, e)| (*l, e.iter().take(per_label).cloned().collect()))
        .collect();
    flatten(&trimmed)
}

/// Real and candidate embeddings from the all-level network, evaluated by
/// nearest centroid and KNN regression.
pub fn evaluate_single(
    net: &EmbedderNetwork,
    dataset: &Dataset,
    source: &SampleSource,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let mut report = base_report(dataset, Some(source), cfg, "single-snn")?;
    let train_groups = embed_split(net, dataset, Split::Train, cfg)?;
    let (ref_emb, ref_labels) = flatten(&train_groups);
    let centroids = compute_centroids(&ref_emb, &ref_labels)?;
    let refs = KnnRegressor::from_labels(ref_emb, &ref_labels)?;

    let val_groups = embed_split(net, dataset, Split::Val, cfg)?;
    let elbow = select_k(&refs, &val_groups, cfg)?;
    let k = cfg.knn.k.unwrap_or(elbow.chosen_k);
    let weighted = cfg.knn.config(k, Weighting::InverseDistance);
    let uniform = cfg.knn.config(k, Weighting::Uniform);
    report.knn_k = Some(k);
    report.elbow = Some(elbow);

    let test_groups = embed_split(net, dataset, Split::Test, cfg)?;
    let mut pooled_pred = Vec::new();
    let mut pooled_true = Vec::new();
    for (label, embs) in &test_groups {
        match label.db() {
            Some(db) => {
                let pred = embs
                    .par_iter()
                    .map(|q| refs.predict_db(q, &weighted))
                    .collect::<Result<Vec<f64>>>()?;
                let truth = vec![db; pred.len()];
                report.record_mut(db).test_rmsde_weighted = Some(rmsde(&pred, &truth)?);
                pooled_pred.extend(pred);
                pooled_true.extend(truth);
            }
            None => {
                let preds = nc_all(&centroids, embs)?;
                report.test_noise_accuracy = Some(label_accuracy(&preds, SnrLabel::Noise)?);
            }
        }
    }
    report.pooled_test_rmsde = Some(rmsde(&pooled_pred, &pooled_true)?);

    let mut source_groups = Vec::new();
    for level in dataset.levels() {
        let db = level_db(level);
        let cand = embed_all(net, &source_inputs(dataset, source, level, cfg)?)?;
        let preds = nc_all(&centroids, &cand)?;
        let w = cand
            .par_iter()
            .map(|q| refs.predict_db(q, &weighted))
            .collect::<Result<Vec<f64>>>()?;
        let u = cand
            .par_iter()
            .map(|q| refs.predict_db(q, &uniform))
            .collect::<Result<Vec<f64>>>()?;
        let truth = vec![db; cand.len()];
        let rec = report.record_mut(db);
        rec.nc_accuracy = Some(label_accuracy(&preds, level)?);
        rec.noise_accuracy =
            Some(preds.iter().filter(|p| !p.is_noise()).count() as f64 / preds.len() as f64);
        rec.rmsde_weighted = Some(rmsde(&w, &truth)?);
        rec.rmsde_uniform = Some(rmsde(&u, &truth)?);
        rec.mean_predicted_db = Some(w.iter().sum::<f64>() / w.len() as f64);
        rec.n_samples = cand.len();
        source_groups.push((level, cand));
    }

    if cfg.tsne_per_label > 0 {
        report.projections = project(&test_groups, &source_groups, cfg)?;
    }
    Ok(report)
}

/// t-SNE of held-out dataset embeddings (`real`) and of candidate
/// embeddings labelled by target level (`source`).
pub fn project(
    real: &[(SnrLabel, Vec<Vec<f64>>)],
    candidates: &[(SnrLabel, Vec<Vec<f64>>)],
    cfg: &ExperimentConfig,
) -> Result<BTreeMap<String, Projection2D>> {
    let mut out = BTreeMap::new();
    for (name, groups) in [("real", real), ("source", candidates)] {
        let (e, l) = capped(groups, cfg.tsne_per_label);
        out.insert(name.to_string(), tsne_project(&e, &l, &cfg.tsne)?);
    }
    Ok(out)
}

pub fn run_single_snn_workflow(
    dataset: &Dataset,
    source: &SampleSource,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    let (net, history) = train_single(dataset, cfg)?;
    let mut report = evaluate_single(&net, dataset, source, cfg)?;
    report.losses.insert("snn_all".into(), history);
    Ok(report)
}
