use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Cell, ExperimentConfig};
use super::HarnessError;
use crate::estimators::{Algorithm, Estimator};
use crate::model::{Observation, SyntheticSpec};
use crate::seed;
use crate::stats::{self, MsePoint, PivotSample, Trajectory};

/// Which vector of an estimator a row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// `θ̄_n` for averaged algorithms, `θ_n` otherwise.
    Estimate,
    /// The raw iterate `θ_n` of an averaged algorithm.
    Iterate,
}

/// One MSE cell at horizon `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    /// `ASGN`, or `ASGN:iterate` for the raw iterate of an averaged method.
    pub label: String,
    pub algorithm: Algorithm,
    pub estimate: EstimateKind,
    pub c_alpha: f64,
    pub alpha: f64,
    pub c_beta: f64,
    pub beta: f64,
    pub n: u64,
    pub mse: Option<f64>,
    pub stderr: Option<f64>,
    pub replications_ok: usize,
    pub failures: usize,
    pub flagged: bool,
    /// `‖θ̂_n − θ‖²` per replication, `None` where the run broke down.
    pub final_errors: Vec<Option<f64>>,
    /// `σ̂²_n` per replication.
    pub sigma2_hat: Vec<Option<f64>>,
    /// Mean of `σ̂²_n` over successful replications.
    pub sigma2_mean: Option<f64>,
}

/// MSE against the number of observations for one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub c_alpha: f64,
    pub alpha: f64,
    pub c_beta: f64,
    pub beta: f64,
    pub points: Vec<MsePoint>,
    /// Log-log slope over the last two decades of checkpoints, when available.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotReport {
    pub label: String,
    /// `C_n` or `C_bar_n`.
    pub statistic: String,
    pub sample: PivotSample,
    pub ks: f64,
    pub ks_critical: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub checkpoints: Vec<u64>,
    pub cells: Vec<CellRow>,
    pub curves: Vec<Curve>,
    pub pivots: Vec<PivotReport>,
    pub warnings: Vec<String>,
    /// Wall-clock seconds; kept out of every written file.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl ExperimentReport {
    pub fn flagged(&self) -> Vec<&CellRow> {
        self.cells.iter().filter(|c| c.flagged).collect()
    }

    pub fn cell(&self, label: &str, c_alpha: f64, alpha: f64) -> Option<&CellRow> {
        self.cells
            .iter()
            .find(|c| c.label == label && c.c_alpha == c_alpha && c.alpha == alpha)
    }

    pub fn curve(&self, label: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.label == label)
    }

    pub fn pivot(&self, statistic: &str) -> Option<&PivotReport> {
        self.pivots.iter().find(|p| p.statistic == statistic)
    }
}

/// What one cell produced in one replication.
#[derive(Debug, Clone)]
struct RunOutcome {
    estimate: Vec<f64>,
    iterate: Option<Vec<f64>>,
    final_estimate: f64,
    final_iterate: Option<f64>,
    sigma2: f64,
    pivot: Option<f64>,
}

type ReplicationResult = Vec<Option<RunOutcome>>;

fn sq_dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `θ + r₀ U` with `U` uniform on the unit sphere.
fn initial_point(theta: &DVector<f64>, r0: f64, master: u64, rep: u64) -> DVector<f64> {
    let mut rng = seed::stream(master, "init", rep);
    let q = theta.len();
    loop {
        let u = DVector::from_fn(q, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = u.norm();
        if norm > 1e-12 {
            return theta + u * (r0 / norm);
        }
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    data: &[Observation],
    theta0: &DVector<f64>,
    theta_true: &DVector<f64>,
    checkpoints: &[u64],
    rep: u64,
) -> Option<RunOutcome> {
    let rng = seed::stream(cfg.master_seed, &cell.key, rep);
    let mut est = Estimator::new(cell.algorithm, cell.hp.clone(), theta0.clone(), rng).ok()?;
    let averaged = cell.algorithm.is_averaged();
    let mut estimate = Vec::with_capacity(checkpoints.len());
    let mut iterate = averaged.then(|| Vec::with_capacity(checkpoints.len()));
    let mut next = 0;
    for obs in data {
        est.step(&cfg.model, obs).ok()?;
        while next < checkpoints.len() && checkpoints[next] == est.n() {
            estimate.push(sq_dist(est.estimate(), theta_true));
            if let Some(it) = iterate.as_mut() {
                it.push(sq_dist(est.theta(), theta_true));
            }
            next += 1;
        }
    }
    let sigma2_hat = est.sigma2().ok()?;
    let pivot = if cfg.pivots && matches!(cell.algorithm, Algorithm::Sgn | Algorithm::Asgn) {
        let scale = est.accumulated_matrix()?;
        let s2 = cfg.known_sigma2.unwrap_or(sigma2_hat);
        Some(stats::pivot_cn(est.estimate(), theta_true, &scale).ok()? / s2)
    } else {
        None
    };
    Some(RunOutcome {
        estimate,
        iterate,
        final_estimate: sq_dist(est.estimate(), theta_true),
        final_iterate: averaged.then(|| sq_dist(est.theta(), theta_true)),
        sigma2: sigma2_hat,
        pivot,
    })
}

fn run_replication(
    cfg: &ExperimentConfig,
    spec: &SyntheticSpec,
    cells: &[Cell],
    checkpoints: &[u64],
    rep: u64,
) -> ReplicationResult {
    let theta_true = spec.theta_true();
    let mut data_rng = seed::stream(cfg.master_seed, "data", rep);
    let data: Vec<Observation> = (0..cfg.n).map(|_| spec.draw(&mut data_rng)).collect();
    let theta0 = initial_point(&theta_true, cfg.init_radius, cfg.master_seed, rep);
    cells
        .iter()
        .map(|cell| run_cell(cfg, cell, &data, &theta0, &theta_true, checkpoints, rep))
        .collect()
}

fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(stderr))
}

/// Slope over checkpoints within two decades of the last one.
fn tail_slope(points: &[MsePoint]) -> Option<f64> {
    let last = points.last()?.n as f64;
    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.n as f64 >= last / 100.0 * (1.0 - 1e-9))
        .map(|p| (p.n as f64, p.mse))
        .collect();
    stats::rate_slope(&tail).ok()
}

/// Runs every replication of `cfg` on `jobs` worker threads (0 = all cores).
pub fn run_experiment(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let spec = cfg.synthetic_spec();
    let cells = cfg.cells();
    let checkpoints = cfg.checkpoint_grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<ReplicationResult> = pool.install(|| {
        (0..cfg.replications as u64)
            .into_par_iter()
            .map(|rep| run_replication(cfg, &spec, &cells, &checkpoints, rep))
            .collect()
    });

    let reps = cfg.replications;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut pivots = Vec::new();
    let mut warnings = Vec::new();
    for (j, cell) in cells.iter().enumerate() {
        for w in cell.hp.theory_warnings(cell.algorithm) {
            warnings.push(format!("{}: {w}", cell.key));
        }
        let outcomes: Vec<Option<&RunOutcome>> = results.iter().map(|r| r[j].as_ref()).collect();
        let ok: Vec<&RunOutcome> = outcomes.iter().flatten().copied().collect();
        let failures = reps - ok.len();
        let flagged = failures as f64 > cfg.failure_threshold * reps as f64;
        let (sigma2_mean, _) = mean_stderr(&ok.iter().map(|o| o.sigma2).collect::<Vec<_>>());
        let p = &cell.point;

        let mut kinds = vec![(EstimateKind::Estimate, cell.algorithm.to_string())];
        if cell.algorithm.is_averaged() {
            kinds.push((EstimateKind::Iterate, format!("{}:iterate", cell.algorithm)));
        }
        for (kind, label) in kinds {
            let pick_final = |o: &RunOutcome| match kind {
                EstimateKind::Estimate => o.final_estimate,
                EstimateKind::Iterate => o.final_iterate.unwrap_or(o.final_estimate),
            };
            let final_errors: Vec<Option<f64>> =
                outcomes.iter().map(|o| o.map(pick_final)).collect();
            let finals: Vec<f64> = final_errors.iter().flatten().copied().collect();
            let (mse, stderr) = mean_stderr(&finals);
            rows.push(CellRow {
                label: label.clone(),
                algorithm: cell.algorithm,
                estimate: kind,
                c_alpha: p.c_alpha,
                alpha: p.alpha,
                c_beta: p.c_beta,
                beta: p.beta,
                n: cfg.n,
                mse,
                stderr,
                replications_ok: ok.len(),
                failures,
                flagged,
                final_errors,
                sigma2_hat: outcomes.iter().map(|o| o.map(|o| o.sigma2)).collect(),
                sigma2_mean,
            });

            let trajectories: Vec<Trajectory> = ok
                .iter()
                .map(|o| Trajectory {
                    checkpoints: checkpoints.clone(),
                    squared_errors: match kind {
                        EstimateKind::Estimate => o.estimate.clone(),
                        EstimateKind::Iterate => o.iterate.clone().unwrap_or_default(),
                    },
                })
                .collect();
            let points = if trajectories.is_empty() {
                Vec::new()
            } else {
                stats::mse_aggregate(&trajectories)?
            };
            let slope = tail_slope(&points);
            curves.push(Curve {
                label,
                c_alpha: p.c_alpha,
                alpha: p.alpha,
                c_beta: p.c_beta,
                beta: p.beta,
                points,
                slope,
            });
        }

        if cfg.pivots && matches!(cell.algorithm, Algorithm::Sgn | Algorithm::Asgn) {
            let values: Vec<f64> = ok.iter().filter_map(|o| o.pivot).collect();
            if values.is_empty() {
                warnings.push(format!("{}: no pivot values", cell.key));
                continue;
            }
            let statistic = if cell.algorithm.is_averaged() {
                "C_bar_n"
            } else {
                "C_n"
            };
            let sample = PivotSample::new(values, cfg.n, cell.algorithm.to_string())?;
            let ks = stats::ks_statistic(&sample)?;
            pivots.push(PivotReport {
                label: cell.algorithm.to_string(),
                statistic: statistic.to_string(),
                ks_critical: stats::ks_critical_99(sample.values.len()),
                mean: sample.mean(),
                ks,
                sample,
            });
        }
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        checkpoints,
        cells: rows,
        curves,
        pivots,
        warnings,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

/// MSE at the horizon only.
pub fn run_table(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport, HarnessError> {
    let mut cfg = cfg.clone();
    cfg.checkpoints = Some(vec![cfg.n]);
    run_experiment(&cfg, jobs)
}

/// MSE at every checkpoint; defaults to 30 log-spaced points in `[100, n]`.
pub fn run_curves(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport, HarnessError> {
    let mut cfg = cfg.clone();
    if cfg.checkpoints.is_none() {
        cfg.checkpoints = Some(stats::log_grid(100, cfg.n, 30));
    }
    run_experiment(&cfg, jobs)
}

/// Pivot samples and their KS distance to χ²₂.
pub fn run_normality(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentReport, HarnessError> {
    let mut cfg = cfg.clone();
    cfg.pivots = true;
    if cfg.checkpoints.is_none() {
        cfg.checkpoints = Some(vec![cfg.n]);
    }
    run_experiment(&cfg, jobs)
}
