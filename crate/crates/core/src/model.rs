//! Regression models `Y = f(X, θ) + ε`, synthetic data generation and the
//! `L(h) = E[∇f ∇fᵀ]` oracle.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum number of Monte Carlo draws accepted by [`l_theta_monte_carlo`].
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Default node count for Simpson quadrature of `L(h)`.
pub const DEFAULT_QUADRATURE_NODES: usize = 2001;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter vector contains non-finite entries")]
    NonFiniteTheta,
    #[error("noise variance must be finite and positive, got {0}")]
    InvalidNoise(f64),
    #[error("covariate law is invalid: {0}")]
    InvalidCovariates(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("at least one observation must be requested")]
    EmptyRequest,
    #[error("Monte Carlo estimate needs at least {MIN_MC_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite gradient at x = {x:?}")]
    NonFiniteGradient { x: Vec<f64> },
    #[error("quadrature requires a scalar uniform covariate")]
    QuadratureUnavailable,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A regression function `f(x, h)` together with its gradient in `h`.
///
/// Implementations must be immutable after construction; the estimators
/// and the harness share one model across replications.
pub trait RegressionModel: Send + Sync {
    /// Dimension `q` of the parameter.
    fn param_dim(&self) -> usize;
    /// Dimension `p` of the covariate.
    fn covariate_dim(&self) -> usize;
    fn eval(&self, x: &[f64], h: &[f64]) -> f64;
    /// Writes `∇_h f(x, h)` into `out` (length `q`).
    fn grad_into(&self, x: &[f64], h: &[f64], out: &mut [f64]);

    fn grad(&self, x: &[f64], h: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.param_dim());
        self.grad_into(x, h, out.as_mut_slice());
        out
    }
}

/// `f(x, h) = h₁ (1 − exp(−h₂ x))` with a scalar covariate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpSaturation;

impl RegressionModel for ExpSaturation {
    fn param_dim(&self) -> usize {
        2
    }

    fn covariate_dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64], h: &[f64]) -> f64 {
        h[0] * (1.0 - (-h[1] * x[0]).exp())
    }

    fn grad_into(&self, x: &[f64], h: &[f64], out: &mut [f64]) {
        let decay = (-h[1] * x[0]).exp();
        out[0] = 1.0 - decay;
        out[1] = h[0] * x[0] * decay;
    }
}

/// The benchmark exponential-saturation model.
pub fn exp_saturation_model() -> ExpSaturation {
    ExpSaturation
}

/// `f(x, h) = hᵀx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub dim: usize,
}

impl RegressionModel for Linear {
    fn param_dim(&self) -> usize {
        self.dim
    }

    fn covariate_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], h: &[f64]) -> f64 {
        x.iter().zip(h).map(|(a, b)| a * b).sum()
    }

    fn grad_into(&self, x: &[f64], _h: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&x[..self.dim]);
    }
}

/// Serializable registry of the built-in models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    ExpSaturation,
    Linear {
        dim: usize,
    },
}

impl RegressionModel for ModelKind {
    fn param_dim(&self) -> usize {
        match self {
            ModelKind::ExpSaturation => ExpSaturation.param_dim(),
            ModelKind::Linear { dim } => *dim,
        }
    }

    fn covariate_dim(&self) -> usize {
        match self {
            ModelKind::ExpSaturation => ExpSaturation.covariate_dim(),
            ModelKind::Linear { dim } => *dim,
        }
    }

    fn eval(&self, x: &[f64], h: &[f64]) -> f64 {
        match self {
            ModelKind::ExpSaturation => ExpSaturation.eval(x, h),
            ModelKind::Linear { dim } => Linear { dim: *dim }.eval(x, h),
        }
    }

    fn grad_into(&self, x: &[f64], h: &[f64], out: &mut [f64]) {
        match self {
            ModelKind::ExpSaturation => ExpSaturation.grad_into(x, h, out),
            ModelKind::Linear { dim } => Linear { dim: *dim }.grad_into(x, h, out),
        }
    }
}

/// One observation `(X, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Observation { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.x.iter().all(|v| v.is_finite())
    }
}

/// Law of each covariate coordinate (drawn independently).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CovariateLaw {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
}

impl Default for CovariateLaw {
    fn default() -> Self {
        CovariateLaw::Uniform {
            low: 0.0,
            high: 1.0,
        }
    }
}

impl CovariateLaw {
    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            CovariateLaw::Uniform { low, high }
                if !(low.is_finite() && high.is_finite() && low < high) =>
            {
                Err(ModelError::InvalidCovariates(format!(
                    "uniform bounds [{low}, {high}]"
                )))
            }
            CovariateLaw::Normal { mean, std }
                if !(mean.is_finite() && std.is_finite() && std > 0.0) =>
            {
                Err(ModelError::InvalidCovariates(format!(
                    "normal(mean={mean}, std={std})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CovariateLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            CovariateLaw::Normal { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
        }
    }
}

/// Zero-mean noise law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseLaw {
    Normal {
        sigma: f64,
    },
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    /// `±scale` with equal probability.
    Rademacher {
        scale: f64,
    },
}

impl Default for NoiseLaw {
    fn default() -> Self {
        NoiseLaw::Normal { sigma: 1.0 }
    }
}

impl NoiseLaw {
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseLaw::Normal { sigma } => sigma * sigma,
            NoiseLaw::Uniform { half_width } => half_width * half_width / 3.0,
            NoiseLaw::Rademacher { scale } => scale * scale,
        }
    }

    /// `Var[ε²]`, used for the σ̂² confidence band.
    pub fn variance_of_square(&self) -> f64 {
        match *self {
            NoiseLaw::Normal { sigma } => 2.0 * sigma.powi(4),
            NoiseLaw::Uniform { half_width } => {
                let a4 = half_width.powi(4);
                a4 / 5.0 - a4 / 9.0
            }
            NoiseLaw::Rademacher { .. } => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseLaw::Normal { sigma } => Normal::new(0.0, sigma)
                .expect("validated sigma")
                .sample(rng),
            NoiseLaw::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            NoiseLaw::Rademacher { scale } => {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            }
        }
    }
}

/// Everything needed to simulate a synthetic data stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub model: ModelKind,
    pub theta_true: Vec<f64>,
    #[serde(default)]
    pub covariates: CovariateLaw,
    #[serde(default)]
    pub noise: NoiseLaw,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    /// The simulation-study setup: θ = (21, 12), X ~ U[0,1], ε ~ N(0,1).
    pub fn benchmark(seed: u64) -> Self {
        SyntheticSpec {
            model: ModelKind::ExpSaturation,
            theta_true: vec![21.0, 12.0],
            covariates: CovariateLaw::default(),
            noise: NoiseLaw::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.theta_true.len() != self.model.param_dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.model.param_dim(),
                got: self.theta_true.len(),
            });
        }
        if !self.theta_true.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFiniteTheta);
        }
        self.covariates.validate()?;
        let var = self.noise.variance();
        if !(var.is_finite() && var > 0.0) {
            return Err(ModelError::InvalidNoise(var));
        }
        Ok(())
    }

    pub fn sigma2(&self) -> f64 {
        self.noise.variance()
    }

    pub fn theta_true(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.theta_true)
    }

    pub fn draw_covariate<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.model.covariate_dim())
            .map(|_| self.covariates.sample(rng))
            .collect()
    }

    /// Draws one observation from `rng`. `self` is assumed validated.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Observation {
        let x = self.draw_covariate(rng);
        let eps = self.noise.sample(rng);
        let y = self.model.eval(&x, &self.theta_true) + eps;
        Observation { x, y }
    }
}

/// Generates `n` i.i.d. observations, deterministically from `spec.seed`.
pub fn generate(spec: &SyntheticSpec, n: usize) -> Result<Vec<Observation>, ModelError> {
    spec.validate()?;
    if n == 0 {
        return Err(ModelError::EmptyRequest);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..n).map(|_| spec.draw(&mut rng)).collect())
}

/// Writes `x_1,...,x_p,y` rows to `csv_path` and the generating spec to a
/// JSON sidecar next to it (`<stem>.json`).
pub fn export_dataset(
    spec: &SyntheticSpec,
    observations: &[Observation],
    csv_path: &Path,
) -> Result<(), ModelError> {
    let p = spec.model.covariate_dim();
    let mut writer = csv::Writer::from_path(csv_path)?;
    let mut header: Vec<String> = (1..=p).map(|i| format!("x_{i}")).collect();
    header.push("y".to_string());
    writer.write_record(&header)?;
    for obs in observations {
        if obs.x.len() != p {
            return Err(ModelError::DimensionMismatch {
                expected: p,
                got: obs.x.len(),
            });
        }
        let mut row: Vec<String> = obs.x.iter().map(|v| v.to_string()).collect();
        row.push(obs.y.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;

    #[derive(Serialize)]
    struct Sidecar<'a> {
        #[serde(flatten)]
        spec: &'a SyntheticSpec,
        n: usize,
    }
    let sidecar = csv_path.with_extension("json");
    let mut out = BufWriter::new(File::create(sidecar)?);
    serde_json::to_writer_pretty(
        &mut out,
        &Sidecar {
            spec,
            n: observations.len(),
        },
    )?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Simpson quadrature of `L(h)` for a scalar uniform covariate.
pub fn l_theta_quadrature<M: RegressionModel + ?Sized>(
    model: &M,
    covariates: &CovariateLaw,
    h: &[f64],
    nodes: usize,
) -> Result<DMatrix<f64>, ModelError> {
    let (low, high) = match *covariates {
        CovariateLaw::Uniform { low, high } if model.covariate_dim() == 1 => (low, high),
        _ => return Err(ModelError::QuadratureUnavailable),
    };
    let q = model.param_dim();
    if h.len() != q {
        return Err(ModelError::DimensionMismatch {
            expected: q,
            got: h.len(),
        });
    }
    // Composite Simpson needs an even number of intervals.
    let intervals = (nodes.max(3) - 1).next_multiple_of(2);
    let width = (high - low) / intervals as f64;
    let mut acc = DMatrix::zeros(q, q);
    let mut g = DVector::zeros(q);
    for i in 0..=intervals {
        let x = [low + width * i as f64];
        model.grad_into(&x, h, g.as_mut_slice());
        if !g.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFiniteGradient { x: x.to_vec() });
        }
        let weight = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.ger(weight, &g, &g, 1.0);
    }
    // Density of U[low, high] is 1/(high - low).
    acc *= width / 3.0 / (high - low);
    Ok(symmetrized(acc))
}

/// Monte Carlo estimate of `L(h)` and the entrywise standard errors.
pub fn l_theta_monte_carlo<M: RegressionModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    covariates: &CovariateLaw,
    h: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<(DMatrix<f64>, DMatrix<f64>), ModelError> {
    if samples < MIN_MC_SAMPLES {
        return Err(ModelError::TooFewSamples(samples));
    }
    let q = model.param_dim();
    if h.len() != q {
        return Err(ModelError::DimensionMismatch {
            expected: q,
            got: h.len(),
        });
    }
    let mut sum = DMatrix::zeros(q, q);
    let mut sum_sq = DMatrix::<f64>::zeros(q, q);
    let mut g = DVector::zeros(q);
    let p = model.covariate_dim();
    let mut x = vec![0.0; p];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = covariates.sample(rng);
        }
        model.grad_into(&x, h, g.as_mut_slice());
        if !g.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFiniteGradient { x });
        }
        for i in 0..q {
            for j in 0..q {
                let v = g[i] * g[j];
                sum[(i, j)] += v;
                sum_sq[(i, j)] += v * v;
            }
        }
    }
    let m = samples as f64;
    let mean: DMatrix<f64> = sum / m;
    let stderr = DMatrix::from_fn(q, q, |i, j| {
        let var = (sum_sq[(i, j)] / m - mean[(i, j)] * mean[(i, j)]).max(0.0) * m / (m - 1.0);
        (var / m).sqrt()
    });
    Ok((symmetrized(mean), stderr))
}

/// `L(h) = E[∇f(X,h) ∇f(X,h)ᵀ]`: quadrature when the covariate is a scalar
/// uniform, Monte Carlo (seeded from `spec.seed`) otherwise.
pub fn l_theta_oracle(
    spec: &SyntheticSpec,
    h: &[f64],
    mc_samples: usize,
) -> Result<DMatrix<f64>, ModelError> {
    match l_theta_quadrature(&spec.model, &spec.covariates, h, DEFAULT_QUADRATURE_NODES) {
        Err(ModelError::QuadratureUnavailable) => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            l_theta_monte_carlo(&spec.model, &spec.covariates, h, mc_samples, &mut rng)
                .map(|(m, _)| m)
        }
        other => other,
    }
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn central_difference<M: RegressionModel>(
        model: &M,
        x: &[f64],
        h: &[f64],
        step: f64,
    ) -> Vec<f64> {
        (0..h.len())
            .map(|i| {
                let scale = step * h[i].abs().max(1.0);
                let mut up = h.to_vec();
                let mut down = h.to_vec();
                up[i] += scale;
                down[i] -= scale;
                (model.eval(x, &up) - model.eval(x, &down)) / (2.0 * scale)
            })
            .collect()
    }

    fn check_gradient<M: RegressionModel>(model: &M, draws: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..draws {
            let x: Vec<f64> = (0..model.covariate_dim())
                .map(|_| rng.random::<f64>())
                .collect();
            let h: Vec<f64> = (0..model.param_dim())
                .map(|_| rng.random_range(0.5..30.0))
                .collect();
            let analytic = model.grad(&x, &h);
            let fd = central_difference(model, &x, &h, 1e-5);
            let norm = analytic.norm().max(1e-3);
            for (a, b) in analytic.iter().zip(&fd) {
                assert!(
                    (a - b).abs() / norm <= 1e-5,
                    "grad {a} vs fd {b} at x={x:?} h={h:?}"
                );
            }
        }
    }

    #[test]
    fn exp_saturation_values() {
        let m = exp_saturation_model();
        let h = [21.0, 12.0];
        assert_eq!(m.eval(&[0.0], &h), 0.0);
        assert_eq!(m.grad(&[0.0], &h).as_slice(), &[0.0, 0.0]);
        assert_relative_eq!(
            m.eval(&[1.0], &h),
            20.999_870_971_540_58,
            max_relative = 1e-12
        );
        let g = m.grad(&[0.5], &h);
        assert_relative_eq!(g[0], 1.0 - (-6.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(g[1], 21.0 * 0.5 * (-6.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn gradients_match_finite_differences() {
        check_gradient(&ExpSaturation, 100, 11);
        check_gradient(&Linear { dim: 4 }, 100, 12);
        check_gradient(&ModelKind::ExpSaturation, 100, 13);
    }

    #[test]
    fn generate_is_deterministic_and_exact() {
        let spec = SyntheticSpec::benchmark(42);
        let a = generate(&spec, 50).unwrap();
        let b = generate(&spec, 50).unwrap();
        assert_eq!(a, b);
        let c = generate(&SyntheticSpec::benchmark(43), 50).unwrap();
        assert_ne!(a, c);
        assert!(a.iter().all(Observation::is_finite));
    }

    #[test]
    fn generate_rejects_bad_specs() {
        let mut spec = SyntheticSpec::benchmark(1);
        spec.noise = NoiseLaw::Normal { sigma: 0.0 };
        assert!(matches!(
            generate(&spec, 10),
            Err(ModelError::InvalidNoise(_))
        ));

        let mut spec = SyntheticSpec::benchmark(1);
        spec.theta_true = vec![f64::NAN, 12.0];
        assert!(matches!(
            generate(&spec, 10),
            Err(ModelError::NonFiniteTheta)
        ));

        let spec = SyntheticSpec::benchmark(1);
        assert!(matches!(generate(&spec, 0), Err(ModelError::EmptyRequest)));

        let mut spec = SyntheticSpec::benchmark(1);
        spec.theta_true = vec![1.0];
        assert!(matches!(
            generate(&spec, 1),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn generated_noise_is_centered() {
        let spec = SyntheticSpec::benchmark(2024);
        let data = generate(&spec, 1_000_000).unwrap();
        let mean: f64 = data
            .iter()
            .map(|o| o.y - spec.model.eval(&o.x, &spec.theta_true))
            .sum::<f64>()
            / data.len() as f64;
        assert!(mean.abs() <= 0.004, "mean residual {mean}");
    }

    #[test]
    fn l_oracle_matches_reference_benchmark_values() {
        let spec = SyntheticSpec::benchmark(0);
        let l = l_theta_oracle(&spec, &[21.0, 12.0], MIN_MC_SAMPLES).unwrap();
        assert!((l[(0, 0)] - 0.875).abs() < 1e-3);
        assert!((l[(0, 1)] - 0.109).abs() < 1e-3);
        assert!((l[(1, 1)] - 0.063).abs() < 1e-3);
        // Closed form of E[(1 - e^{-12X})^2] for X ~ U[0,1].
        let exact = 1.0 - (1.0 - (-12.0f64).exp()) / 6.0 + (1.0 - (-24.0f64).exp()) / 24.0;
        assert_relative_eq!(l[(0, 0)], exact, max_relative = 1e-10);
        let eig = l.clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((ev[0] - 0.889).abs() < 1e-3);
        assert!((ev[1] - 0.049).abs() < 1e-3);
        assert!((l[(0, 1)] - l[(1, 0)]).abs() <= 1e-12);
    }

    #[test]
    fn l_oracle_zero_gradient_is_zero() {
        // Linear gradient is x itself; a support squeezed onto 0 makes it vanish.
        let law = CovariateLaw::Uniform {
            low: 0.0,
            high: 1e-300,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, _) = l_theta_monte_carlo(
            &Linear { dim: 3 },
            &law,
            &[1.0, 2.0, 3.0],
            MIN_MC_SAMPLES,
            &mut rng,
        )
        .unwrap();
        assert!(m.iter().all(|v| v.abs() < 1e-300));
    }

    #[test]
    fn quadrature_and_monte_carlo_agree() {
        let h = [21.0, 12.0];
        let law = CovariateLaw::default();
        let quad = l_theta_quadrature(&ExpSaturation, &law, &h, 1001).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (mc, se) = l_theta_monte_carlo(&ExpSaturation, &law, &h, 200_000, &mut rng).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (quad[(i, j)] - mc[(i, j)]).abs() <= 3.0 * se[(i, j)],
                    "entry ({i},{j}): quad {} mc {} se {}",
                    quad[(i, j)],
                    mc[(i, j)],
                    se[(i, j)]
                );
            }
        }
        let ev = quad.symmetric_eigen().eigenvalues;
        assert!(ev.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn monte_carlo_requires_enough_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = l_theta_monte_carlo(
            &ExpSaturation,
            &CovariateLaw::default(),
            &[1.0, 1.0],
            10,
            &mut rng,
        );
        assert!(matches!(err, Err(ModelError::TooFewSamples(10))));
    }

    #[test]
    fn export_writes_header_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::benchmark(5);
        let data = generate(&spec, 3).unwrap();
        let path = dir.path().join("data.csv");
        export_dataset(&spec, &data, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x_1,y\n"));
        assert_eq!(text.lines().count(), 4);
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("data.json")).unwrap())
                .unwrap();
        assert_eq!(sidecar["seed"], 5);
        assert_eq!(sidecar["noise"]["law"], "normal");
    }
}
