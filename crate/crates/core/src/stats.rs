//! Monte Carlo post-processing: MSE tables, quadratic-form pivots, the χ²₂
//! law, one-sample Kolmogorov–Smirnov distance and log-log rate slopes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Asymptotic 99% critical value of `√N · D_N`.
pub const KS_CRITICAL_99: f64 = 1.63;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample value {0} is negative or non-finite")]
    InvalidValue(f64),
    #[error("chi-squared CDF evaluated at negative point {0}")]
    NegativeArgument(f64),
    #[error("quadratic form is negative ({0:e}); scaling matrix is not PSD")]
    NotPsd(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("checkpoint grids differ between replications")]
    MismatchedCheckpoints,
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("checkpoints span {0:.2} decades, need at least 2")]
    NarrowSpan(f64),
    #[error("non-positive value in log-log fit: n = {n}, mse = {mse}")]
    NonPositive { n: f64, mse: f64 },
}

/// Pivot values collected across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotSample {
    pub values: Vec<f64>,
    pub n_obs: u64,
    pub algorithm: String,
}

impl PivotSample {
    pub fn new(
        values: Vec<f64>,
        n_obs: u64,
        algorithm: impl Into<String>,
    ) -> Result<Self, StatsError> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(StatsError::InvalidValue(bad));
        }
        Ok(PivotSample {
            values,
            n_obs,
            algorithm: algorithm.into(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `dᵀ M d` with `d = θ̂ − θ`.
pub fn pivot_cn(
    theta_hat: &DVector<f64>,
    theta_true: &DVector<f64>,
    scaling: &DMatrix<f64>,
) -> Result<f64, StatsError> {
    let q = theta_true.len();
    if theta_hat.len() != q {
        return Err(StatsError::DimensionMismatch {
            expected: q,
            got: theta_hat.len(),
        });
    }
    if scaling.nrows() != q || scaling.ncols() != q {
        return Err(StatsError::DimensionMismatch {
            expected: q,
            got: scaling.nrows(),
        });
    }
    let d = theta_hat - theta_true;
    let value = d.dot(&(scaling * &d));
    if value < -1e-10 {
        return Err(StatsError::NotPsd(value));
    }
    Ok(value.max(0.0))
}

/// CDF of the χ² law with two degrees of freedom, `1 − e^{−x/2}`.
pub fn chi2_2_cdf(x: f64) -> Result<f64, StatsError> {
    if x < 0.0 || x.is_nan() {
        return Err(StatsError::NegativeArgument(x));
    }
    Ok(-(-x / 2.0).exp_m1())
}

/// Quantile of χ²₂, `−2 ln(1 − p)`.
pub fn chi2_2_quantile(p: f64) -> f64 {
    -2.0 * (-p).ln_1p()
}

/// One-sample KS distance of `values` against a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above.abs()).max(below.abs())
    }))
}

/// KS distance of a pivot sample against χ²₂.
pub fn ks_statistic(sample: &PivotSample) -> Result<f64, StatsError> {
    ks_distance(&sample.values, |x| {
        chi2_2_cdf(x).expect("pivot values are nonnegative")
    })
}

/// `1.63 / √N`.
pub fn ks_critical_99(n: usize) -> f64 {
    KS_CRITICAL_99 / (n as f64).sqrt()
}

/// Points of the empirical CDF next to the χ²₂ CDF, for plotting.
pub fn ecdf_grid(sample: &PivotSample) -> Vec<(f64, f64, f64)> {
    let mut sorted = sample.values.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, (i as f64 + 1.0) / n, chi2_2_cdf(x).unwrap_or(0.0)))
        .collect()
}

/// Mean and standard error at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub n: u64,
    pub mse: f64,
    pub stderr: f64,
    pub replications: usize,
}

/// Squared errors of one replication at a grid of checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub checkpoints: Vec<u64>,
    pub squared_errors: Vec<f64>,
}

/// Mean squared error and its Monte Carlo standard error per checkpoint.
pub fn mse_aggregate(trajectories: &[Trajectory]) -> Result<Vec<MsePoint>, StatsError> {
    let first = trajectories.first().ok_or(StatsError::EmptySample)?;
    if trajectories.iter().any(|t| {
        t.checkpoints != first.checkpoints || t.squared_errors.len() != first.checkpoints.len()
    }) {
        return Err(StatsError::MismatchedCheckpoints);
    }
    let r = trajectories.len() as f64;
    Ok(first
        .checkpoints
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mean = trajectories
                .iter()
                .map(|t| t.squared_errors[j])
                .sum::<f64>()
                / r;
            let stderr = if trajectories.len() > 1 {
                let var = trajectories
                    .iter()
                    .map(|t| (t.squared_errors[j] - mean).powi(2))
                    .sum::<f64>()
                    / (r - 1.0);
                (var / r).sqrt()
            } else {
                0.0
            };
            MsePoint {
                n,
                mse: mean,
                stderr,
                replications: trajectories.len(),
            }
        })
        .collect())
}

/// Least-squares slope of `ln mse` against `ln n`.
pub fn rate_slope(points: &[(f64, f64)]) -> Result<f64, StatsError> {
    if points.len() < 5 {
        return Err(StatsError::TooFewPoints {
            min: 5,
            got: points.len(),
        });
    }
    if let Some(&(n, mse)) = points.iter().find(|(n, m)| !(*n > 0.0 && *m > 0.0)) {
        return Err(StatsError::NonPositive { n, mse });
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(n, _)| {
            (lo.min(n), hi.max(n))
        });
    let decades = (hi / lo).log10();
    if decades < 2.0 - 1e-9 {
        return Err(StatsError::NarrowSpan(decades));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, m)| (n.ln(), m.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// `count` log-spaced integers in `[lo, hi]`, deduplicated and sorted.
pub fn log_grid(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let lo = lo.max(1).min(hi);
    if count <= 1 || lo == hi {
        return vec![hi];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .map(|v| v.clamp(lo, hi))
        .collect();
    grid.dedup();
    grid
}
