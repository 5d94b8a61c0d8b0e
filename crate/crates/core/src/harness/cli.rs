//! Command-line front end. Flags override values from `--config`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::config::ExperimentConfig;
use super::data::Dataset;
use super::report::{emit_report, EvalReport};
use super::source::SampleSource;
use super::workflows::{
    embed_split, evaluate_per_snr, evaluate_single, project, resolved_config,
    run_spectral_workflow, select_k, train_per_snr, train_single, LevelModel,
};
use crate::embedder::{
    load_checkpoint, save_checkpoint, write_loss_history, EmbedderNetwork, EpochLoss,
};
use crate::error::{Error, Result};
use crate::inference::KnnRegressor;
use crate::label::SnrLabel;
use crate::metrics::Method;
use crate::synth::{build_dataset, Quality, Split};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SNRGE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "snrge",
    version,
    about = "SNR-controlled whistle datasets and generated-audio evaluation"
)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise a labelled whistle/noise dataset.
    GenerateDataset {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        clips_per_level: Option<usize>,
        #[arg(long)]
        noise_clips: Option<usize>,
        /// Comma-separated SNR levels in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
    },
    /// Train embedding networks and write checkpoints plus loss histories.
    TrainEmbedder {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One whistle-vs-noise network per level.
        #[arg(long, conflicts_with = "all_snr", required_unless_present = "all_snr")]
        per_snr: bool,
        /// A single network over all levels and noise.
        #[arg(long)]
        all_snr: bool,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Score a generator under test against the dataset.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        method: EvalMethod,
        #[arg(long)]
        out: PathBuf,
        /// Checkpoints from `train-embedder`; networks are trained when absent.
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        source: SourceFlags,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Sweep K for KNN regression and report the elbow.
    SelectK {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// t-SNE projections of dataset and candidate embeddings.
    Project {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        per_label: Option<usize>,
        #[arg(long)]
        perplexity: Option<f64>,
        #[command(flatten)]
        source: SourceFlags,
    },
    /// Merge report.json files and render the combined report.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvalMethod {
    Spectra,
    Pixels,
    SnnNc,
    SnnKnn,
}

#[derive(Debug, Args)]
struct TrainFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    embedder_seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct SourceFlags {
    /// Candidate WAVs in `<dir>/<level tag>/`; the simulator is used otherwise.
    #[arg(long)]
    source_dir: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    bias_db: Option<f64>,
    #[arg(long)]
    quality: Option<Quality>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    source_seed: Option<u64>,
}

impl TrainFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.epochs {
            cfg.embedder.epochs = v;
        }
        if let Some(v) = self.embedder_seed {
            cfg.embedder.seed = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.embedder.learning_rate = v;
        }
    }
}

impl SourceFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if self.source_dir.is_some() {
            cfg.source.dir = self.source_dir.clone();
        }
        let sim = &mut cfg.source.simulator;
        if let Some(v) = self.bias_db {
            sim.bias_db = v;
        }
        if let Some(v) = self.quality {
            sim.quality = v;
        }
        if let Some(v) = self.count {
            sim.count = v;
        }
        if let Some(v) = self.source_seed {
            sim.seed = v;
        }
    }
}

fn checkpoint_name(label: Option<SnrLabel>) -> String {
    match label {
        Some(l) => format!("snn_{}", l.tag()),
        None => "snn_all".into(),
    }
}

fn read_loss_history(path: &Path) -> Result<Vec<EpochLoss>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn save_model(dir: &Path, name: &str, net: &EmbedderNetwork, history: &[EpochLoss]) -> Result<()> {
    save_checkpoint(net, dir.join(format!("{name}.ckpt")))?;
    write_loss_history(history, dir.join(format!("loss_{name}.csv")))
}

/// Loads a checkpoint and makes `cfg` describe its architecture.
fn load_model(
    dir: &Path,
    name: &str,
    cfg: &mut ExperimentConfig,
) -> Result<(EmbedderNetwork, Vec<EpochLoss>)> {
    let net = load_checkpoint(dir.join(format!("{name}.ckpt")))?;
    cfg.embedder = net.config().clone();
    let history = read_loss_history(&dir.join(format!("loss_{name}.csv")))?;
    Ok((net, history))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn stamp_and_emit(mut report: EvalReport, out: &Path) -> Result<()> {
    report.metadata.created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    emit_report(&report, out)
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    match cli.command {
        Command::GenerateDataset {
            out,
            seed,
            clips_per_level,
            noise_clips,
            grid,
        } => {
            let d = &mut cfg.dataset;
            if let Some(v) = seed {
                d.seed = v;
            }
            if let Some(v) = clips_per_level {
                d.clips_per_level = v;
            }
            if noise_clips.is_some() {
                d.noise_clips = noise_clips;
            }
            if let Some(v) = grid {
                d.grid = v;
            }
            let manifest = build_dataset(d, &out)?;
            println!(
                "{} clips written to {} (digest {})",
                manifest.entries.len(),
                out.display(),
                manifest.digest()?
            );
        }
        Command::TrainEmbedder {
            dataset,
            out,
            per_snr,
            all_snr: _,
            train,
        } => {
            train.apply(&mut cfg);
            let data = Dataset::open(&dataset)?;
            ensure_dir(&out)?;
            if per_snr {
                for m in train_per_snr(&data, &cfg)? {
                    let name = checkpoint_name(Some(SnrLabel::Decibel(m.snr_db)));
                    match m.outcome {
                        Ok((net, history)) => save_model(&out, &name, &net, &history)?,
                        Err(msg) => eprintln!("{name}: training failed: {msg}"),
                    }
                }
            } else {
                let (net, history) = train_single(&data, &cfg)?;
                save_model(&out, &checkpoint_name(None), &net, &history)?;
            }
            let resolved = resolved_config(&data, &cfg).to_toml()?;
            let path = out.join("experiment.toml");
            std::fs::write(&path, resolved).map_err(|e| Error::io(&path, e))?;
        }
        Command::Evaluate {
            dataset,
            method,
            out,
            models,
            k,
            source,
            train,
        } => {
            source.apply(&mut cfg);
            train.apply(&mut cfg);
            if k.is_some() {
                cfg.knn.k = k;
            }
            let data = Dataset::open(&dataset)?;
            let src = SampleSource::from_config(&cfg.source);
            let report = match method {
                EvalMethod::Spectra => run_spectral_workflow(&data, &src, Method::Frequency, &cfg)?,
                EvalMethod::Pixels => run_spectral_workflow(&data, &src, Method::Pixels, &cfg)?,
                EvalMethod::SnnNc => {
                    let trained = match &models {
                        Some(dir) => {
                            let mut loaded = Vec::new();
                            for level in data.levels() {
                                let name = checkpoint_name(Some(level));
                                let outcome = load_model(dir, &name, &mut cfg)?;
                                loaded.push(LevelModel {
                                    snr_db: level.db().expect("grid level"),
                                    outcome: Ok(outcome),
                                });
                            }
                            loaded
                        }
                        None => train_per_snr(&data, &cfg)?,
                    };
                    evaluate_per_snr(&trained, &data, &src, &cfg)?
                }
                EvalMethod::SnnKnn => {
                    let (net, history) = match &models {
                        Some(dir) => load_model(dir, &checkpoint_name(None), &mut cfg)?,
                        None => train_single(&data, &cfg)?,
                    };
                    let mut report = evaluate_single(&net, &data, &src, &cfg)?;
                    report.losses.insert(checkpoint_name(None), history);
                    report
                }
            };
            stamp_and_emit(report, &out)?;
        }
        Command::SelectK {
            dataset,
            models,
            out,
            k_max,
        } => {
            if let Some(v) = k_max {
                cfg.knn.k_max = v;
            }
            let data = Dataset::open(&dataset)?;
            let (net, _) = load_model(&models, &checkpoint_name(None), &mut cfg)?;
            let (refs, labels): (Vec<_>, Vec<_>) = embed_split(&net, &data, Split::Train, &cfg)?
                .into_iter()
                .flat_map(|(l, e)| e.into_iter().map(move |v| (v, l)))
                .unzip();
            let refs = KnnRegressor::from_labels(refs, &labels)?;
            let val = embed_split(&net, &data, Split::Val, &cfg)?;
            let elbow = select_k(&refs, &val, &cfg)?;
            println!("chosen k = {}", elbow.chosen_k);
            let mut report = EvalReport {
                knn_k: Some(elbow.chosen_k),
                elbow: Some(elbow),
                ..Default::default()
            };
            report.metadata.config = Some(resolved_config(&data, &cfg));
            report.metadata.workflows.push("select-k".into());
            report.metadata.manifest_digest = Some(data.digest()?);
            stamp_and_emit(report, &out)?;
        }
        Command::Project {
            dataset,
            models,
            out,
            per_label,
            perplexity,
            source,
        } => {
            source.apply(&mut cfg);
            if let Some(v) = per_label {
                cfg.tsne_per_label = v;
            }
            if let Some(v) = perplexity {
                cfg.tsne.perplexity = v;
            }
            let data = Dataset::open(&dataset)?;
            let (net, _) = load_model(&models, &checkpoint_name(None), &mut cfg)?;
            let src = SampleSource::from_config(&cfg.source);
            let real = embed_split(&net, &data, Split::Test, &cfg)?;
            let mut cand = Vec::new();
            for level in data.levels() {
                let clips = src.clips(level, &data.config.synth)?;
                let inputs =
                    super::data::prepare_inputs(&clips, &cfg.stft, cfg.embedder.input_shape)?;
                cand.push((level, super::workflows::embed_all(&net, &inputs)?));
            }
            let mut report = EvalReport {
                projections: project(&real, &cand, &cfg)?,
                ..Default::default()
            };
            report.metadata.config = Some(resolved_config(&data, &cfg));
            report.metadata.workflows.push("project".into());
            report.metadata.source = Some(src.describe());
            report.metadata.manifest_digest = Some(data.digest()?);
            stamp_and_emit(report, &out)?;
        }
        Command::Report { inputs, out } => {
            let mut merged = EvalReport::default();
            for path in &inputs {
                merged.merge(&EvalReport::load(path)?)?;
            }
            emit_report(&merged, &out)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage, 2 data, 3 numeric failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads().and_then(|()| execute(cli)) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["snrge"]), 1);
        assert_eq!(run(["snrge", "evaluate", "--method", "bogus"]), 1);
        assert_eq!(
            run(["snrge", "train-embedder", "--dataset", "d", "--out", "o"]),
            1
        );
        assert_eq!(
            run([
                "snrge",
                "train-embedder",
                "--dataset",
                "d",
                "--out",
                "o",
                "--per-snr",
                "--all-snr"
            ]),
            1
        );
        assert_eq!(run(["snrge", "--help"]), 0);
    }

    #[test]
    fn missing_dataset_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let code = run([
            "snrge".as_ref(),
            "evaluate".as_ref(),
            "--method".as_ref(),
            "spectra".as_ref(),
            "--dataset".as_ref(),
            dir.path().join("nope").as_os_str(),
            "--out".as_ref(),
            dir.path().join("out").as_os_str(),
        ] as [&std::ffi::OsStr; 8]);
        assert_eq!(code, 2);
    }
}
