use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Layout;
use super::engine::{CellRow, EstimateKind, ExperimentReport};
use super::HarnessError;
use crate::stats;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: serde_json::Value,
    pub seed: u64,
    pub versions: serde_json::Value,
    pub files: Vec<ManifestEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_mse_csv(report: &ExperimentReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "algorithm",
        "c_alpha",
        "alpha",
        "c_beta",
        "beta",
        "n",
        "mse",
        "stderr",
        "replications_ok",
        "failures",
        "flagged",
    ])?;
    for c in &report.cells {
        w.write_record([
            c.label.clone(),
            c.c_alpha.to_string(),
            c.alpha.to_string(),
            c.c_beta.to_string(),
            c.beta.to_string(),
            c.n.to_string(),
            opt(c.mse),
            opt(c.stderr),
            c.replications_ok.to_string(),
            c.failures.to_string(),
            c.flagged.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_curves_csv(report: &ExperimentReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "algorithm",
        "c_alpha",
        "alpha",
        "c_beta",
        "beta",
        "n",
        "mse",
        "stderr",
    ])?;
    for c in &report.curves {
        for p in &c.points {
            w.write_record([
                c.label.clone(),
                c.c_alpha.to_string(),
                c.alpha.to_string(),
                c.c_beta.to_string(),
                c.beta.to_string(),
                p.n.to_string(),
                p.mse.to_string(),
                p.stderr.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_slopes_csv(report: &ExperimentReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(["algorithm", "c_alpha", "alpha", "c_beta", "beta", "slope"])?;
    for c in &report.curves {
        w.write_record([
            c.label.clone(),
            c.c_alpha.to_string(),
            c.alpha.to_string(),
            c.c_beta.to_string(),
            c.beta.to_string(),
            opt(c.slope),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_pivot_csvs(
    report: &ExperimentReport,
    dir: &Path,
    name: &str,
) -> Result<Vec<PathBuf>, HarnessError> {
    let values = dir.join(format!("{name}_pivots.csv"));
    let ks = dir.join(format!("{name}_ks.csv"));
    let ecdf = dir.join(format!("{name}_ecdf.csv"));

    let mut w = csv_writer(&values)?;
    w.write_record(["algorithm", "statistic", "replication", "value"])?;
    for p in &report.pivots {
        for (i, v) in p.sample.values.iter().enumerate() {
            w.write_record([
                p.label.clone(),
                p.statistic.clone(),
                i.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io_err(&values))?;

    let mut w = csv_writer(&ks)?;
    w.write_record([
        "algorithm",
        "statistic",
        "n",
        "count",
        "ks",
        "ks_critical_99",
        "mean",
    ])?;
    for p in &report.pivots {
        w.write_record([
            p.label.clone(),
            p.statistic.clone(),
            p.sample.n_obs.to_string(),
            p.sample.values.len().to_string(),
            p.ks.to_string(),
            p.ks_critical.to_string(),
            p.mean.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(&ks))?;

    let mut w = csv_writer(&ecdf)?;
    w.write_record(["algorithm", "statistic", "x", "ecdf", "chi2_2_cdf"])?;
    for p in &report.pivots {
        for (x, e, c) in stats::ecdf_grid(&p.sample) {
            w.write_record([
                p.label.clone(),
                p.statistic.clone(),
                x.to_string(),
                e.to_string(),
                c.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io_err(&ecdf))?;
    Ok(vec![values, ks, ecdf])
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn grid_table(out: &mut String, rows: &[&CellRow], layout: Layout) {
    type Key = fn(&CellRow) -> f64;
    let (row_key, col_key, scale, row_name, col_name): (Key, Key, f64, &str, &str) = match layout {
        Layout::Step => (|c| c.c_alpha, |c| c.alpha, 1.0, "c_alpha", "alpha"),
        Layout::Regularization => (|c| c.c_beta, |c| c.beta, 100.0, "c_beta", "beta"),
    };
    let row_vals = distinct(rows.iter().map(|c| row_key(c)));
    let col_vals = distinct(rows.iter().map(|c| col_key(c)));
    if scale != 1.0 {
        let _ = writeln!(out, "(MSE x {scale})");
    }
    let _ = write!(out, "{:>12}", format!("{row_name}\\{col_name}"));
    for c in &col_vals {
        let _ = write!(out, " {:>12}", c);
    }
    out.push('\n');
    for r in &row_vals {
        let _ = write!(out, "{:>12}", r);
        for c in &col_vals {
            let cell = rows.iter().find(|x| row_key(x) == *r && col_key(x) == *c);
            let text = match cell {
                Some(x) => match x.mse {
                    Some(m) => format!("{:.4}{}", m * scale, if x.flagged { "*" } else { "" }),
                    None => "failed".to_string(),
                },
                None => "-".to_string(),
            };
            let _ = write!(out, " {:>12}", text);
        }
        out.push('\n');
    }
}

/// Plain-text summary: one grid per reported row label.
pub fn render_text(report: &ExperimentReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: n = {}, replications = {}, r0 = {}, seed = {}, projection = {}",
        cfg.name, cfg.n, cfg.replications, cfg.init_radius, cfg.master_seed, cfg.projection
    );
    let mut labels: Vec<&str> = Vec::new();
    for c in &report.cells {
        if !labels.contains(&c.label.as_str()) {
            labels.push(&c.label);
        }
    }
    for label in labels {
        let rows: Vec<&CellRow> = report.cells.iter().filter(|c| c.label == label).collect();
        let _ = writeln!(out, "\n{label}");
        grid_table(&mut out, &rows, cfg.layout);
    }
    if report.checkpoints.len() > 1 {
        let _ = writeln!(out, "\nlog-log slopes over the last two decades");
        for c in &report.curves {
            let slope = c
                .slope
                .map(|s| format!("{s:.3}"))
                .unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                out,
                "{:>14} c_alpha={} alpha={}: {slope}",
                c.label, c.c_alpha, c.alpha
            );
        }
    }
    if !report.pivots.is_empty() {
        let _ = writeln!(out, "\npivots (n = {})", cfg.n);
        for p in &report.pivots {
            let _ = writeln!(
                out,
                "{:>6} {:>8}: mean = {:.4}, KS = {:.4} (99% critical {:.4}), count = {}",
                p.label,
                p.statistic,
                p.mean,
                p.ks,
                p.ks_critical,
                p.sample.values.len()
            );
        }
    }
    let flagged: Vec<&CellRow> = report
        .cells
        .iter()
        .filter(|c| c.flagged && c.estimate == EstimateKind::Estimate)
        .collect();
    if !flagged.is_empty() {
        let _ = writeln!(
            out,
            "\nflagged cells (* above), failure fraction over {}:",
            cfg.failure_threshold
        );
        for c in flagged {
            let _ = writeln!(
                out,
                "  {} c_alpha={} alpha={} c_beta={} beta={}: {} of {} failed",
                c.label, c.c_alpha, c.alpha, c.c_beta, c.beta, c.failures, cfg.replications
            );
        }
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(out, "\nwarnings");
        for w in &report.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}

/// Writes the report files into `dir` and returns their paths.
pub fn write_report(
    report: &ExperimentReport,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = &report.config.name;
    let mut files = Vec::new();
    match format {
        OutputFormat::Csv => {
            let mse = dir.join(format!("{name}_mse.csv"));
            write_mse_csv(report, &mse)?;
            files.push(mse);
            if report.checkpoints.len() > 1 {
                let curves = dir.join(format!("{name}_curves.csv"));
                write_curves_csv(report, &curves)?;
                files.push(curves);
                let slopes = dir.join(format!("{name}_slopes.csv"));
                write_slopes_csv(report, &slopes)?;
                files.push(slopes);
            }
            if !report.pivots.is_empty() {
                files.extend(write_pivot_csvs(report, dir, name)?);
            }
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{name}.json"));
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            fs::write(&path, text).map_err(io_err(&path))?;
            files.push(path);
        }
    }
    let txt = dir.join(format!("{name}.txt"));
    fs::write(&txt, render_text(report)).map_err(io_err(&txt))?;
    files.push(txt);
    Ok(files)
}

pub fn sha256_file(path: &Path) -> Result<String, HarnessError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `manifest.json` listing every file with its SHA-256.
pub fn write_manifest(
    dir: &Path,
    command: serde_json::Value,
    seed: u64,
    files: &[PathBuf],
) -> Result<PathBuf, HarnessError> {
    let mut entries = Vec::with_capacity(files.len());
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(f);
        entries.push(ManifestEntry {
            path: rel.display().to_string(),
            sha256: sha256_file(f)?,
        });
    }
    let manifest = RunManifest {
        command,
        seed,
        versions: serde_json::json!({
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "report_schema": 1,
        }),
        files: entries,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}
