//! Experiment orchestration: configuration, sample sources, the spectral
//! and embedding workflows, report emission and the command-line front end.

pub mod cli;
mod config;
mod data;
mod report;
mod source;
mod workflows;

pub use config::{ExperimentConfig, KnnSettings, SourceConfig};
pub use data::{prepare_inputs, Dataset};
pub use report::{
    emit_report, flag_loss_outliers, EvalReport, LevelFailure, LevelRecord, RunMetadata,
    REPORT_FILE, REPORT_SCHEMA_VERSION,
};
pub use source::{export_simulated, SampleSource};
pub use workflows::{
    embed_all, embed_split, evaluate_per_snr, evaluate_single, project, resolved_config,
    run_individual_snn_workflow, run_single_snn_workflow, run_spectral_workflow, select_k,
    train_per_snr, train_single, LevelModel,
};
