use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::embedder::{write_loss_history, EpochLoss};
use crate::error::{Error, Result};
use crate::inference::ElbowSelection;
use crate::viz::{emit_line_chart, emit_scatter, Projection2D, Series};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";

/// Results for one grid level. Fields a workflow does not produce stay
/// `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelRecord {
    pub snr_db: f64,
    pub frequency_score: Option<f64>,
    pub pixel_score: Option<f64>,
    /// Share of candidates the level's own whistle-vs-noise network places
    /// nearer the whistle centroid.
    pub individual_nc_accuracy: Option<f64>,
    /// Share of candidates the all-level network labels with exactly this
    /// level.
    pub nc_accuracy: Option<f64>,
    /// Share of candidates the all-level network does not label as noise.
    pub noise_accuracy: Option<f64>,
    pub rmsde_uniform: Option<f64>,
    pub rmsde_weighted: Option<f64>,
    /// Weighted-KNN RMSDE of the level's held-out dataset clips.
    pub test_rmsde_weighted: Option<f64>,
    pub mean_predicted_db: Option<f64>,
    pub n_samples: usize,
    /// Final validation loss of the level's own network.
    pub final_loss: Option<f64>,
    pub loss_outlier: bool,
}

impl LevelRecord {
    fn merge(&mut self, other: &LevelRecord) {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f; })*};
        }
        take!(
            frequency_score,
            pixel_score,
            individual_nc_accuracy,
            nc_accuracy,
            noise_accuracy,
            rmsde_uniform,
            rmsde_weighted,
            test_rmsde_weighted,
            mean_predicted_db,
            final_loss
        );
        self.n_samples = self.n_samples.max(other.n_samples);
        self.loss_outlier |= other.loss_outlier;
    }

    fn numbers(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        [
            ("frequency_score", self.frequency_score),
            ("pixel_score", self.pixel_score),
            ("individual_nc_accuracy", self.individual_nc_accuracy),
            ("nc_accuracy", self.nc_accuracy),
            ("noise_accuracy", self.noise_accuracy),
            ("rmsde_uniform", self.rmsde_uniform),
            ("rmsde_weighted", self.rmsde_weighted),
            ("test_rmsde_weighted", self.test_rmsde_weighted),
            ("mean_predicted_db", self.mean_predicted_db),
            ("final_loss", self.final_loss),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.map(|v| (name, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetadata {
    /// Resolved configuration of the run.
    pub config: Option<ExperimentConfig>,
    pub workflows: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub source: Option<String>,
    pub manifest_digest: Option<String>,
    /// Unix seconds; stamped by the command-line front end only, so
    /// library reruns compare equal.
    pub created_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFailure {
    pub snr_db: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    /// Sorted by `snr_db`, one per level.
    pub records: Vec<LevelRecord>,
    pub metadata: RunMetadata,
    pub elbow: Option<ElbowSelection>,
    pub knn_k: Option<usize>,
    /// Weighted-KNN RMSDE over every held-out whistle clip.
    pub pooled_test_rmsde: Option<f64>,
    /// Share of held-out noise clips the all-level network labels noise.
    pub test_noise_accuracy: Option<f64>,
    pub losses: BTreeMap<String, Vec<EpochLoss>>,
    pub projections: BTreeMap<String, Projection2D>,
    pub failures: Vec<LevelFailure>,
}

impl Default for EvalReport {
    fn default() -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            records: Vec::new(),
            metadata: RunMetadata::default(),
            elbow: None,
            knn_k: None,
            pooled_test_rmsde: None,
            test_noise_accuracy: None,
            losses: BTreeMap::new(),
            projections: BTreeMap::new(),
            failures: Vec::new(),
        }
    }
}

impl EvalReport {
    /// The record for `snr_db`, inserted in order if absent.
    pub fn record_mut(&mut self, snr_db: f64) -> &mut LevelRecord {
        let pos = self.records.partition_point(|r| r.snr_db < snr_db);
        if self.records.get(pos).is_none_or(|r| r.snr_db != snr_db) {
            self.records.insert(
                pos,
                LevelRecord {
                    snr_db,
                    ..Default::default()
                },
            );
        }
        &mut self.records[pos]
    }

    pub fn record(&self, snr_db: f64) -> Option<&LevelRecord> {
        self.records.iter().find(|r| r.snr_db == snr_db)
    }

    /// Folds `other` into `self`; values present in `other` win.
    pub fn merge(&mut self, other: &EvalReport) -> Result<()> {
        if let (Some(a), Some(b)) = (
            &self.metadata.manifest_digest,
            &other.metadata.manifest_digest,
        ) {
            if a != b {
                return Err(Error::Mismatch(
                    "reports come from datasets with different manifests".into(),
                ));
            }
        }
        for r in &other.records {
            self.record_mut(r.snr_db).merge(r);
        }
        let m = &other.metadata;
        if m.config.is_some() {
            self.metadata.config = m.config.clone();
        }
        for w in &m.workflows {
            if !self.metadata.workflows.contains(w) {
                self.metadata.workflows.push(w.clone());
            }
        }
        self.metadata
            .seeds
            .extend(m.seeds.iter().map(|(k, v)| (k.clone(), *v)));
        if m.source.is_some() {
            self.metadata.source = m.source.clone();
        }
        if m.manifest_digest.is_some() {
            self.metadata.manifest_digest = m.manifest_digest.clone();
        }
        if m.created_at.is_some() {
            self.metadata.created_at = m.created_at;
        }
        if other.elbow.is_some() {
            self.elbow = other.elbow.clone();
        }
        self.knn_k = other.knn_k.or(self.knn_k);
        self.pooled_test_rmsde = other.pooled_test_rmsde.or(self.pooled_test_rmsde);
        self.test_noise_accuracy = other.test_noise_accuracy.or(self.test_noise_accuracy);
        self.losses
            .extend(other.losses.iter().map(|(k, v)| (k.clone(), v.clone())));
        self.projections.extend(
            other
                .projections
                .iter()
                .map(|(k, v)| (k.clone(), v.clone())),
        );
        self.failures.extend(other.failures.iter().cloned());
        Ok(())
    }

    /// Range and finiteness checks on every reported number.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for pair in self.records.windows(2) {
            if pair[0].snr_db >= pair[1].snr_db {
                return bad(format!(
                    "duplicate or unordered level {} dB",
                    pair[1].snr_db
                ));
            }
        }
        for r in &self.records {
            for (name, v) in r.numbers() {
                if !v.is_finite() {
                    return bad(format!("{name} at {} dB is not finite", r.snr_db));
                }
                let unit = name.ends_with("score") || name.ends_with("accuracy");
                if unit && !(0.0..=1.0).contains(&v) {
                    return bad(format!("{name} at {} dB outside [0, 1]: {v}", r.snr_db));
                }
                if name.starts_with("rmsde") && v < 0.0 {
                    return bad(format!("{name} at {} dB is negative", r.snr_db));
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
            && self.elbow.is_none()
            && self.projections.is_empty()
            && self.losses.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: EvalReport = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Mismatch(format!(
                "report schema {} (expected {REPORT_SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Marks levels whose final loss lies more than two median absolute
/// deviations from the median over all levels.
pub fn flag_loss_outliers(records: &mut [LevelRecord]) {
    let mut losses: Vec<f64> = records.iter().filter_map(|r| r.final_loss).collect();
    if losses.len() < 3 {
        return;
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let m = median(&mut losses);
    let mut dev: Vec<f64> = losses.iter().map(|l| (l - m).abs()).collect();
    let mad = median(&mut dev);
    for r in records {
        r.loss_outlier = r
            .final_loss
            .is_some_and(|l| (l - m).abs() > 2.0 * mad && mad > 0.0);
    }
}

fn series(
    records: &[LevelRecord],
    label: &str,
    f: impl Fn(&LevelRecord) -> Option<f64>,
) -> Option<Series> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| f(r).map(|v| (r.snr_db, v)))
        .collect();
    (!points.is_empty()).then(|| Series {
        label: label.to_string(),
        points,
    })
}

/// Writes `report.json`, `levels.csv` and the figures into `out_dir`,
/// creating it when its parent exists.
pub fn emit_report(report: &EvalReport, out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    if report.is_empty() {
        return Err(Error::EmptyInput("report has no content"));
    }
    report.validate()?;
    if !out_dir.is_dir() {
        let parent = out_dir.parent().filter(|p| !p.as_os_str().is_empty());
        if parent.is_some_and(|p| !p.is_dir()) {
            return Err(Error::MissingFile(parent.expect("checked").to_path_buf()));
        }
        fs::create_dir(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    let json_path = out_dir.join(REPORT_FILE);
    fs::write(&json_path, report.to_json()?).map_err(|e| Error::io(&json_path, e))?;

    let csv_path = out_dir.join("levels.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in &report.records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let recs = &report.records;
    let scores: Vec<Series> = [
        series(recs, "frequency", |r| r.frequency_score),
        series(recs, "pixel intensity", |r| r.pixel_score),
        series(recs, "individual SNN NC", |r| r.individual_nc_accuracy),
        series(recs, "single SNN NC", |r| r.nc_accuracy),
        series(recs, "single SNN noise", |r| r.noise_accuracy),
    ]
    .into_iter()
    .flatten()
    .collect();
    if !scores.is_empty() {
        emit_line_chart(
            &scores,
            "Score vs SNR",
            "SNR (dB)",
            "score",
            out_dir.join("scores_vs_snr.svg"),
        )?;
    }
    let rmsde: Vec<Series> = [
        series(recs, "uniform", |r| r.rmsde_uniform),
        series(recs, "weighted", |r| r.rmsde_weighted),
        series(recs, "held-out test", |r| r.test_rmsde_weighted),
    ]
    .into_iter()
    .flatten()
    .collect();
    if !rmsde.is_empty() {
        emit_line_chart(
            &rmsde,
            "RMSDE vs SNR",
            "SNR (dB)",
            "RMSDE (dB)",
            out_dir.join("rmsde_vs_snr.svg"),
        )?;
    }

    if let Some(elbow) = &report.elbow {
        let path = out_dir.join("elbow.csv");
        let mut w = csv::Writer::from_path(&path)?;
        for p in &elbow.curve {
            w.serialize(p)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        let curve = |name: &str, f: fn(&crate::inference::ElbowPoint) -> f64| {
            vec![Series {
                label: name.to_string(),
                points: elbow.curve.iter().map(|p| (p.k as f64, f(p))).collect(),
            }]
        };
        emit_line_chart(
            &curve("RMSE", |p| p.rmse),
            "KNN elbow: RMSE",
            "k",
            "RMSE",
            out_dir.join("elbow_rmse.svg"),
        )?;
        emit_line_chart(
            &curve("R²", |p| p.r2),
            "KNN elbow: R²",
            "k",
            "R²",
            out_dir.join("elbow_r2.svg"),
        )?;
        emit_line_chart(
            &curve("max distance", |p| p.max_dist),
            "KNN elbow: max neighbour distance",
            "k",
            "distance",
            out_dir.join("elbow_max_dist.svg"),
        )?;
    }

    for (name, history) in &report.losses {
        write_loss_history(history, out_dir.join(format!("loss_{name}.csv")))?;
    }
    let val: Vec<Series> = report
        .losses
        .iter()
        .filter(|(_, h)| !h.is_empty())
        .map(|(name, h)| Series {
            label: name.clone(),
            points: h.iter().map(|e| (e.epoch as f64, e.val_loss)).collect(),
        })
        .collect();
    if !val.is_empty() {
        emit_line_chart(
            &val,
            "Validation loss",
            "epoch",
            "loss",
            out_dir.join("val_loss.svg"),
        )?;
    }
    for (name, proj) in &report.projections {
        emit_scatter(
            proj,
            &format!("t-SNE: {name}"),
            out_dir.join(format!("projection_{name}.svg")),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(levels: usize) -> EvalReport {
        let mut r = EvalReport::default();
        for i in 0..levels {
            let rec = r.record_mut(-15.0 + i as f64);
            rec.frequency_score = Some(i as f64 / levels as f64 + 1e-3 / 7.0);
            rec.rmsde_weighted = Some(0.1 * i as f64 + std::f64::consts::PI);
            rec.n_samples = 200;
        }
        r.metadata.manifest_digest = Some("abc".into());
        r
    }

    #[test]
    fn json_round_trip_exact() {
        let r = sample_report(26);
        let back = EvalReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn emit_writes_one_row_per_level() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        emit_report(&sample_report(26), &out).unwrap();
        let csv = fs::read_to_string(out.join("levels.csv")).unwrap();
        assert_eq!(csv.lines().count(), 27);
        assert!(out.join("scores_vs_snr.svg").exists());
        assert!(out.join("rmsde_vs_snr.svg").exists());
        let back = EvalReport::load(out.join(REPORT_FILE)).unwrap();
        assert_eq!(back, sample_report(26));
        assert!(emit_report(&sample_report(2), dir.path().join("a/b")).is_err());
        assert!(emit_report(&EvalReport::default(), &out).is_err());
    }

    #[test]
    fn merge_combines_fields() {
        let mut a = sample_report(3);
        let mut b = EvalReport::default();
        b.record_mut(-14.0).pixel_score = Some(0.5);
        b.record_mut(20.0).nc_accuracy = Some(1.0);
        a.merge(&b).unwrap();
        assert_eq!(a.records.len(), 4);
        let r = a.record(-14.0).unwrap();
        assert_eq!(r.pixel_score, Some(0.5));
        assert!(r.frequency_score.is_some());
        let mut c = EvalReport::default();
        c.metadata.manifest_digest = Some("other".into());
        assert!(a.merge(&c).is_err());
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let mut r = sample_report(2);
        r.record_mut(-15.0).nc_accuracy = Some(1.5);
        assert!(r.validate().is_err());
    }

    #[test]
    fn outliers_flagged_by_mad() {
        let mut recs: Vec<LevelRecord> = [0.10, 0.11, 0.09, 0.10, 0.01]
            .iter()
            .enumerate()
            .map(|(i, &l)| LevelRecord {
                snr_db: i as f64,
                final_loss: Some(l),
                ..Default::default()
            })
            .collect();
        flag_loss_outliers(&mut recs);
        let flagged: Vec<bool> = recs.iter().map(|r| r.loss_outlier).collect();
        assert_eq!(flagged, vec![false, false, false, false, true]);
    }
}
