//! Monte Carlo experiments over synthetic data streams.
//!
//! Every replication draws one data stream and one initial point, shared by
//! all cells (algorithm × hyperparameters) so that comparisons are paired.
//! Replications run in parallel; results are collected by index, so the
//! report does not depend on the number of workers.

pub mod cli;
mod config;
mod engine;
mod output;

use thiserror::Error;

pub use config::{Cell, ExperimentConfig, GridPoint, Layout};
pub use engine::{
    run_curves, run_experiment, run_normality, run_table, CellRow, Curve, EstimateKind,
    ExperimentReport, PivotReport,
};
pub use output::{
    render_text, sha256_file, write_manifest, write_report, ManifestEntry, OutputFormat,
    RunManifest,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("statistics: {0}")]
    Stats(#[from] crate::stats::StatsError),
}
