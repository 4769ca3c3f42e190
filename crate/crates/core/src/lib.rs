//! Streaming parameter estimation for nonlinear regression `Y = f(X, θ) + ε`.
//!
//! The crate provides online stochastic Gauss-Newton estimators (plain and
//! averaged) that maintain the inverse of their curvature matrix through
//! rank-one Riccati updates, stochastic gradient baselines, and a Monte Carlo
//! harness that measures their error, rates and asymptotic normality on
//! synthetic data.

pub mod estimators;
pub mod harness;
pub mod model;
pub mod riccati;
pub mod seed;
pub mod stats;

pub use estimators::{
    project, Algorithm, Ball, Checkpoint, Estimator, EstimatorError, HyperParams,
};
pub use model::{
    exp_saturation_model, generate, l_theta_oracle, ExpSaturation, Linear, ModelKind, Observation,
    RegressionModel, SyntheticSpec,
};
pub use riccati::{InverseState, RiccatiError};
pub use stats::{chi2_2_cdf, ks_statistic, mse_aggregate, pivot_cn, rate_slope, PivotSample};
