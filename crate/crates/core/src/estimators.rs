//! Online estimators consuming one observation at a time.
//!
//! * `SGN`  – stochastic Gauss-Newton, `θ ← θ + H⁻¹ ∇f (Y − f)`, with `H`
//!   the running sum of gradient outer products plus an optional Gaussian
//!   regularization stream `c_β k^{−β} Z Zᵀ`.
//! * `ASGN` – averaged stochastic Gauss-Newton: step `γ_k · k · S⁻¹` with
//!   `γ_k = c_α k^{−α}`, Polyak-Ruppert average `θ̄`, and `S` accumulated
//!   from gradients taken at the averaged iterate.
//! * `SGD`/`ASGD` – stochastic gradient with step `γ_k` and its average.
//! * `RLS` – recursive least squares on the raw covariates.
//!
//! The k-th consumed observation (k ≥ 1) uses `γ_k = c_α k^{−α}` and the
//! regularization weight `c_β k^{−β}`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Observation, RegressionModel};
use crate::riccati::{InverseState, RiccatiError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite {what} at observation {step}")]
    NonFinite { what: &'static str, step: u64 },
    #[error("variance estimate requested before any observation")]
    NoObservations,
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("observation {step}: {source}")]
    Riccati { step: u64, source: RiccatiError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "SGN")]
    Sgn,
    #[serde(rename = "ASGN")]
    Asgn,
    #[serde(rename = "SGD")]
    Sgd,
    #[serde(rename = "ASGD")]
    Asgd,
    #[serde(rename = "RLS")]
    Rls,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Sgn,
        Algorithm::Asgn,
        Algorithm::Sgd,
        Algorithm::Asgd,
        Algorithm::Rls,
    ];

    pub fn is_averaged(self) -> bool {
        matches!(self, Algorithm::Asgn | Algorithm::Asgd)
    }

    pub fn uses_inverse(self) -> bool {
        matches!(self, Algorithm::Sgn | Algorithm::Asgn | Algorithm::Rls)
    }

    pub fn uses_step_sequence(self) -> bool {
        matches!(self, Algorithm::Asgn | Algorithm::Sgd | Algorithm::Asgd)
    }

    pub fn uses_regularization(self) -> bool {
        matches!(self, Algorithm::Sgn | Algorithm::Asgn)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sgn => "SGN",
            Algorithm::Asgn => "ASGN",
            Algorithm::Sgd => "SGD",
            Algorithm::Asgd => "ASGD",
            Algorithm::Rls => "RLS",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Euclidean ball used to project iterates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        distance(theta, &self.center) <= self.radius + 1e-12
    }

    pub fn project_in_place(&self, theta: &mut [f64]) {
        let dist = distance(theta, &self.center);
        if dist > self.radius {
            let scale = self.radius / dist;
            for (t, c) in theta.iter_mut().zip(&self.center) {
                *t = c + scale * (*t - c);
            }
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean projection of `theta` onto the ball of the given center and radius.
pub fn project(theta: &DVector<f64>, center: &DVector<f64>, radius: f64) -> DVector<f64> {
    let mut out = theta.clone();
    Ball::new(center.as_slice().to_vec(), radius).project_in_place(out.as_mut_slice());
    out
}

/// Tuning constants shared by all algorithms; each algorithm reads the
/// subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HyperParamsRecord", into = "HyperParamsRecord")]
pub struct HyperParams {
    pub c_alpha: f64,
    pub alpha: f64,
    pub c_beta: f64,
    pub beta: f64,
    pub s0: DMatrix<f64>,
    pub projection: Option<Ball>,
}

impl HyperParams {
    /// `c_α = 1`, `α = 0.66`, no regularization, `S₀ = I`, no projection.
    pub fn new(dim: usize) -> Self {
        HyperParams {
            c_alpha: 1.0,
            alpha: 0.66,
            c_beta: 0.0,
            beta: 0.0,
            s0: DMatrix::identity(dim, dim),
            projection: None,
        }
    }

    pub fn with_step(mut self, c_alpha: f64, alpha: f64) -> Self {
        self.c_alpha = c_alpha;
        self.alpha = alpha;
        self
    }

    pub fn with_regularization(mut self, c_beta: f64, beta: f64) -> Self {
        self.c_beta = c_beta;
        self.beta = beta;
        self
    }

    pub fn with_s0(mut self, s0: DMatrix<f64>) -> Self {
        self.s0 = s0;
        self
    }

    pub fn with_projection(mut self, ball: Ball) -> Self {
        self.projection = Some(ball);
        self
    }

    pub fn dim(&self) -> usize {
        self.s0.nrows()
    }

    /// Checks the hard constraints every algorithm relies on.
    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |msg: String| Err(EstimatorError::InvalidHyperParams(msg));
        if !(self.c_alpha.is_finite() && self.c_alpha > 0.0) {
            return bad(format!("c_alpha must be positive, got {}", self.c_alpha));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.5 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (1/2, 1], got {}", self.alpha));
        }
        if !(self.c_beta.is_finite() && self.c_beta >= 0.0) {
            return bad(format!("c_beta must be nonnegative, got {}", self.c_beta));
        }
        if !self.beta.is_finite() || self.beta < 0.0 || (self.c_beta > 0.0 && self.beta == 0.0) {
            return bad(format!(
                "beta must be positive when c_beta > 0, got {}",
                self.beta
            ));
        }
        if let Some(ball) = &self.projection {
            if !(ball.radius.is_finite() && ball.radius > 0.0) {
                return bad(format!(
                    "projection radius must be positive, got {}",
                    ball.radius
                ));
            }
            if ball.center.len() != self.dim() {
                return Err(EstimatorError::DimensionMismatch {
                    expected: self.dim(),
                    got: ball.center.len(),
                });
            }
        }
        InverseState::init(self.s0.clone())
            .map(|_| ())
            .map_err(|e| EstimatorError::InvalidHyperParams(format!("S0: {e}")))
    }

    /// Conditions required by the convergence theory that the configuration
    /// violates. These do not prevent running.
    pub fn theory_warnings(&self, algorithm: Algorithm) -> Vec<String> {
        let mut out = Vec::new();
        if algorithm.is_averaged() && self.alpha >= 1.0 {
            out.push(format!("alpha = {} is not in (1/2, 1)", self.alpha));
        }
        if self.c_beta > 0.0 {
            match algorithm {
                Algorithm::Asgn if self.beta >= self.alpha - 0.5 => {
                    out.push(format!("beta = {} is not in (0, alpha - 1/2)", self.beta));
                }
                Algorithm::Sgn if self.beta >= 0.5 => {
                    out.push(format!("beta = {} is not in (0, 1/2)", self.beta));
                }
                _ => {}
            }
        }
        out
    }

    /// `γ_k = c_α k^{−α}`.
    pub fn step_size(&self, k: u64) -> f64 {
        self.c_alpha * (k as f64).powf(-self.alpha)
    }

    /// Weight `c_β k^{−β}` of the k-th regularization term.
    pub fn regularization_weight(&self, k: u64) -> f64 {
        if self.c_beta == 0.0 {
            0.0
        } else {
            self.c_beta * (k as f64).powf(-self.beta)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HyperParamsRecord {
    c_alpha: f64,
    alpha: f64,
    c_beta: f64,
    beta: f64,
    dim: usize,
    /// Row-major.
    s0: Vec<f64>,
    projection: Option<Ball>,
}

impl From<HyperParams> for HyperParamsRecord {
    fn from(hp: HyperParams) -> Self {
        HyperParamsRecord {
            c_alpha: hp.c_alpha,
            alpha: hp.alpha,
            c_beta: hp.c_beta,
            beta: hp.beta,
            dim: hp.dim(),
            s0: row_major(&hp.s0),
            projection: hp.projection,
        }
    }
}

impl TryFrom<HyperParamsRecord> for HyperParams {
    type Error = String;

    fn try_from(r: HyperParamsRecord) -> Result<Self, Self::Error> {
        if r.s0.len() != r.dim * r.dim {
            return Err(format!(
                "s0 has {} entries, expected {}",
                r.s0.len(),
                r.dim * r.dim
            ));
        }
        Ok(HyperParams {
            c_alpha: r.c_alpha,
            alpha: r.alpha,
            c_beta: r.c_beta,
            beta: r.beta,
            s0: DMatrix::from_row_slice(r.dim, r.dim, &r.s0),
            projection: r.projection,
        })
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Per-algorithm streaming state.
#[derive(Debug, Clone)]
pub struct Estimator {
    algorithm: Algorithm,
    hp: HyperParams,
    theta: DVector<f64>,
    theta_bar: Option<DVector<f64>>,
    inverse: Option<InverseState>,
    n: u64,
    sse: f64,
    rng: ChaCha8Rng,
    grad: DVector<f64>,
    grad_bar: DVector<f64>,
    direction: DVector<f64>,
    z: DVector<f64>,
}

impl Estimator {
    /// `rng` feeds the regularization draws `Z_k ~ N(0, I_q)` only.
    pub fn new(
        algorithm: Algorithm,
        hp: HyperParams,
        theta0: DVector<f64>,
        rng: ChaCha8Rng,
    ) -> Result<Self, EstimatorError> {
        hp.validate()?;
        let q = hp.dim();
        if theta0.len() != q {
            return Err(EstimatorError::DimensionMismatch {
                expected: q,
                got: theta0.len(),
            });
        }
        if !theta0.iter().all(|v| v.is_finite()) {
            return Err(EstimatorError::NonFinite {
                what: "initial parameter",
                step: 0,
            });
        }
        let inverse = if algorithm.uses_inverse() {
            let s0_inv = hp
                .s0
                .clone()
                .cholesky()
                .map(|c| c.inverse())
                .ok_or_else(|| {
                    EstimatorError::InvalidHyperParams("S0 is not positive definite".into())
                })?;
            let s0_inv = (&s0_inv + s0_inv.transpose()) * 0.5;
            Some(
                InverseState::init(s0_inv)
                    .map_err(|e| EstimatorError::InvalidHyperParams(e.to_string()))?,
            )
        } else {
            None
        };
        let theta_bar = algorithm.is_averaged().then(|| theta0.clone());
        Ok(Estimator {
            algorithm,
            hp,
            theta: theta0,
            theta_bar,
            inverse,
            n: 0,
            sse: 0.0,
            rng,
            grad: DVector::zeros(q),
            grad_bar: DVector::zeros(q),
            direction: DVector::zeros(q),
            z: DVector::zeros(q),
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn hyperparams(&self) -> &HyperParams {
        &self.hp
    }

    /// Current raw iterate.
    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    /// Running mean of all iterates, for the averaged algorithms.
    pub fn theta_bar(&self) -> Option<&DVector<f64>> {
        self.theta_bar.as_ref()
    }

    /// The algorithm's reported estimate: `θ̄` when averaged, `θ` otherwise.
    pub fn estimate(&self) -> &DVector<f64> {
        self.theta_bar.as_ref().unwrap_or(&self.theta)
    }

    pub fn inverse(&self) -> Option<&InverseState> {
        self.inverse.as_ref()
    }

    /// Observations consumed so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Running sum of squared one-step-ahead prediction errors.
    pub fn sse(&self) -> f64 {
        self.sse
    }

    /// `σ̂²_n = (1/n) Σ (Ŷ_k − Y_k)²`.
    pub fn sigma2(&self) -> Result<f64, EstimatorError> {
        if self.n == 0 {
            return Err(EstimatorError::NoObservations);
        }
        Ok(self.sse / self.n as f64)
    }

    /// The accumulated matrix `S_n` (or `H̃_n`), recovered from its inverse.
    pub fn accumulated_matrix(&self) -> Option<DMatrix<f64>> {
        self.inverse.as_ref().and_then(|inv| inv.matrix().ok())
    }

    /// `S̄_n = S_n / (n + 1)`, the running estimate of `L(θ)`.
    pub fn normalized_matrix(&self) -> Option<DMatrix<f64>> {
        self.accumulated_matrix().map(|m| m / (self.n + 1) as f64)
    }

    /// Consumes one observation.
    pub fn step<M: RegressionModel + ?Sized>(
        &mut self,
        model: &M,
        obs: &Observation,
    ) -> Result<(), EstimatorError> {
        let q = self.theta.len();
        let k = self.n + 1;
        if self.algorithm == Algorithm::Rls {
            if obs.x.len() != q {
                return Err(EstimatorError::DimensionMismatch {
                    expected: q,
                    got: obs.x.len(),
                });
            }
        } else if model.param_dim() != q {
            return Err(EstimatorError::DimensionMismatch {
                expected: q,
                got: model.param_dim(),
            });
        }
        match self.algorithm {
            Algorithm::Sgn => self.sgn_step(model, obs, k)?,
            Algorithm::Asgn => self.asgn_step(model, obs, k)?,
            Algorithm::Sgd | Algorithm::Asgd => self.sgd_step(model, obs, k)?,
            Algorithm::Rls => self.rls_step(obs, k)?,
        }
        if let Some(ball) = &self.hp.projection {
            ball.project_in_place(self.theta.as_mut_slice());
        }
        if !self.theta.iter().all(|v| v.is_finite()) {
            return Err(EstimatorError::NonFinite {
                what: "iterate",
                step: k,
            });
        }
        if let Some(bar) = self.theta_bar.as_mut() {
            // θ̄_k = (k θ̄_{k-1} + θ_k) / (k + 1)
            let kf = k as f64;
            for (b, t) in bar.iter_mut().zip(self.theta.iter()) {
                *b = (kf * *b + t) / (kf + 1.0);
            }
        }
        self.n = k;
        Ok(())
    }

    /// Residual `Y − f(X, θ)` and `∇f(X, θ)` into `self.grad`.
    fn residual_and_gradient<M: RegressionModel + ?Sized>(
        &mut self,
        model: &M,
        obs: &Observation,
        k: u64,
    ) -> Result<f64, EstimatorError> {
        let residual = obs.y - model.eval(&obs.x, self.theta.as_slice());
        model.grad_into(&obs.x, self.theta.as_slice(), self.grad.as_mut_slice());
        if !residual.is_finite() {
            return Err(EstimatorError::NonFinite {
                what: "residual",
                step: k,
            });
        }
        if !self.grad.iter().all(|v| v.is_finite()) {
            return Err(EstimatorError::NonFinite {
                what: "gradient",
                step: k,
            });
        }
        Ok(residual)
    }

    fn draw_regularizer(&mut self, k: u64) -> f64 {
        let w = self.hp.regularization_weight(k);
        if w > 0.0 {
            for zi in self.z.iter_mut() {
                *zi = self.rng.sample(StandardNormal);
            }
        }
        w
    }

    fn sgn_step<M: RegressionModel + ?Sized>(
        &mut self,
        model: &M,
        obs: &Observation,
        k: u64,
    ) -> Result<(), EstimatorError> {
        let residual = self.residual_and_gradient(model, obs, k)?;
        self.sse += residual * residual;
        let w = self.draw_regularizer(k);
        let (z, grad) = (&self.z, &self.grad);
        let inverse = self.inverse.as_mut().expect("SGN maintains an inverse");
        inverse
            .double_update(z, w, grad)
            .map_err(|source| EstimatorError::Riccati { step: k, source })?;
        // Gain uses H̃_k⁻¹, which already contains the current gradient.
        self.direction.gemv(1.0, inverse.inv(), &self.grad, 0.0);
        self.theta.axpy(residual, &self.direction, 1.0);
        Ok(())
    }

    fn asgn_step<M: RegressionModel + ?Sized>(
        &mut self,
        model: &M,
        obs: &Observation,
        k: u64,
    ) -> Result<(), EstimatorError> {
        let residual = self.residual_and_gradient(model, obs, k)?;
        let bar = self.theta_bar.as_ref().expect("ASGN is averaged");
        let prediction = model.eval(&obs.x, bar.as_slice());
        model.grad_into(&obs.x, bar.as_slice(), self.grad_bar.as_mut_slice());
        if !prediction.is_finite() || !self.grad_bar.iter().all(|v| v.is_finite()) {
            return Err(EstimatorError::NonFinite {
                what: "gradient at the averaged iterate",
                step: k,
            });
        }
        self.sse += (prediction - obs.y) * (prediction - obs.y);

        // θ_k = θ_{k-1} + γ_k · k S_{k-1}⁻¹ ∇f(X, θ_{k-1}) (Y − f(X, θ_{k-1}))
        let gain = self.hp.step_size(k) * k as f64 * residual;
        let inverse = self.inverse.as_ref().expect("ASGN maintains an inverse");
        self.direction.gemv(1.0, inverse.inv(), &self.grad, 0.0);
        self.theta.axpy(gain, &self.direction, 1.0);

        let w = self.draw_regularizer(k);
        let (z, grad_bar) = (&self.z, &self.grad_bar);
        let inverse = self.inverse.as_mut().expect("ASGN maintains an inverse");
        inverse
            .double_update(z, w, grad_bar)
            .map_err(|source| EstimatorError::Riccati { step: k, source })
    }

    fn sgd_step<M: RegressionModel + ?Sized>(
        &mut self,
        model: &M,
        obs: &Observation,
        k: u64,
    ) -> Result<(), EstimatorError> {
        let residual = self.residual_and_gradient(model, obs, k)?;
        if let Some(bar) = self.theta_bar.as_ref() {
            let prediction = model.eval(&obs.x, bar.as_slice());
            self.sse += (prediction - obs.y) * (prediction - obs.y);
        } else {
            self.sse += residual * residual;
        }
        let gain = self.hp.step_size(k) * residual;
        self.theta.axpy(gain, &self.grad, 1.0);
        Ok(())
    }

    fn rls_step(&mut self, obs: &Observation, k: u64) -> Result<(), EstimatorError> {
        self.grad.copy_from_slice(&obs.x);
        let residual = obs.y - self.theta.dot(&self.grad);
        if !residual.is_finite() || !self.grad.iter().all(|v| v.is_finite()) {
            return Err(EstimatorError::NonFinite {
                what: "residual",
                step: k,
            });
        }
        self.sse += residual * residual;
        let grad = &self.grad;
        let inverse = self.inverse.as_mut().expect("RLS maintains an inverse");
        inverse
            .rank_one_update(grad, 1.0)
            .map_err(|source| EstimatorError::Riccati { step: k, source })?;
        self.direction.gemv(1.0, inverse.inv(), &self.grad, 0.0);
        self.theta.axpy(residual, &self.direction, 1.0);
        Ok(())
    }

    /// Snapshot of the full state, restorable bit-exactly.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            algorithm: self.algorithm,
            hyperparams: self.hp.clone(),
            n: self.n,
            theta: self.theta.as_slice().to_vec(),
            theta_bar: self.theta_bar.as_ref().map(|b| b.as_slice().to_vec()),
            inverse: self.inverse.as_ref().map(|inv| row_major(inv.inv())),
            sse: self.sse,
            rng_state: RngState::capture(&self.rng),
        }
    }

    pub fn from_checkpoint(cp: Checkpoint) -> Result<Self, EstimatorError> {
        let bad = |msg: &str| EstimatorError::Checkpoint(msg.to_string());
        let q = cp.hyperparams.dim();
        let rng = cp.rng_state.restore()?;
        let mut est = Estimator::new(
            cp.algorithm,
            cp.hyperparams,
            DVector::from_vec(cp.theta),
            rng,
        )?;
        match (cp.theta_bar, cp.algorithm.is_averaged()) {
            (Some(bar), true) if bar.len() == q => est.theta_bar = Some(DVector::from_vec(bar)),
            (None, false) => {}
            _ => return Err(bad("theta_bar does not match the algorithm")),
        }
        match (cp.inverse, cp.algorithm.uses_inverse()) {
            (Some(inv), true) if inv.len() == q * q => {
                let updates = if cp.algorithm == Algorithm::Rls {
                    cp.n
                } else {
                    2 * cp.n
                };
                let state = InverseState::from_parts(DMatrix::from_row_slice(q, q, &inv), updates)
                    .map_err(|e| EstimatorError::Checkpoint(e.to_string()))?;
                est.inverse = Some(state);
            }
            (None, false) => {}
            _ => return Err(bad("inverse does not match the algorithm")),
        }
        if !(cp.sse.is_finite() && cp.sse >= 0.0) {
            return Err(bad("sse must be finite and nonnegative"));
        }
        est.n = cp.n;
        est.sse = cp.sse;
        Ok(est)
    }
}

/// Serialized estimator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub algorithm: Algorithm,
    pub hyperparams: HyperParams,
    pub n: u64,
    pub theta: Vec<f64>,
    pub theta_bar: Option<Vec<f64>>,
    /// Row-major `S_n⁻¹` / `H̃_n⁻¹`.
    pub inverse: Option<Vec<f64>>,
    pub sse: f64,
    pub rng_state: RngState,
}

/// Position of a ChaCha8 stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    /// Hex-encoded 32-byte key.
    pub seed: String,
    pub stream: u64,
    /// Word position, as a decimal string (128-bit).
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngState {
            seed: hex::encode(rng.get_seed()),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng, EstimatorError> {
        let bytes = hex::decode(&self.seed)
            .map_err(|e| EstimatorError::Checkpoint(format!("rng seed: {e}")))?;
        let seed: [u8; 32] = bytes
            .try_into()
            .map_err(|_| EstimatorError::Checkpoint("rng seed must be 32 bytes".into()))?;
        let word_pos: u128 = self
            .word_pos
            .parse()
            .map_err(|e| EstimatorError::Checkpoint(format!("rng word_pos: {e}")))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(word_pos);
        Ok(rng)
    }
}
