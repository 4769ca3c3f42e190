use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::estimators::{Algorithm, Ball, HyperParams};
use crate::model::{CovariateLaw, ModelKind, NoiseLaw, RegressionModel, SyntheticSpec};

/// One point of the hyperparameter grid. `algorithms` restricts the point to
/// a subset of the experiment's algorithms; absent means all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub c_alpha: f64,
    pub alpha: f64,
    #[serde(default)]
    pub c_beta: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithms: Option<Vec<Algorithm>>,
}

impl GridPoint {
    pub fn new(c_alpha: f64, alpha: f64, c_beta: f64, beta: f64) -> Self {
        GridPoint {
            c_alpha,
            alpha,
            c_beta,
            beta,
            algorithms: None,
        }
    }

    pub fn only(mut self, algorithms: &[Algorithm]) -> Self {
        self.algorithms = Some(algorithms.to_vec());
        self
    }
}

/// Which hyperparameter pair spans the rows and columns of the text tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Rows `c_alpha`, columns `alpha`.
    #[default]
    Step,
    /// Rows `c_beta`, columns `beta`, values ×10².
    Regularization,
}

fn default_true() -> bool {
    true
}

fn default_radius() -> f64 {
    12.0
}

fn default_sigma2() -> Option<f64> {
    Some(1.0)
}

fn default_failure_threshold() -> f64 {
    0.05
}

fn default_theta() -> Vec<f64> {
    vec![21.0, 12.0]
}

/// A Monte Carlo experiment. Mirrors the JSON accepted by `custom --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "default_theta")]
    pub theta_true: Vec<f64>,
    #[serde(default)]
    pub covariates: CovariateLaw,
    #[serde(default)]
    pub noise: NoiseLaw,
    pub algorithms: Vec<Algorithm>,
    pub grid: Vec<GridPoint>,
    pub n: u64,
    pub replications: usize,
    /// `θ₀ = θ + r₀ U` with `U` uniform on the unit sphere.
    pub init_radius: f64,
    /// Sorted checkpoints in `[1, n]`; absent means `[n]`.
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub master_seed: u64,
    /// Projects every iterate onto the ball centred at `theta_true`.
    #[serde(default = "default_true")]
    pub projection: bool,
    #[serde(default = "default_radius")]
    pub projection_radius: f64,
    /// Collect `C_n`/`C̄_n` pivots for the Gauss-Newton algorithms.
    #[serde(default)]
    pub pivots: bool,
    /// Noise variance used to scale the pivots; `null` uses `σ̂²`.
    #[serde(default = "default_sigma2")]
    pub known_sigma2: Option<f64>,
    #[serde(default)]
    pub layout: Layout,
    /// Fraction of failed replications above which a cell is flagged.
    #[serde(default = "default_failure_threshold")]
    pub failure_threshold: f64,
}

/// One (algorithm, hyperparameters) pair of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub point: GridPoint,
    pub hp: HyperParams,
    /// Stable identifier, also used to derive the cell's random stream.
    pub key: String,
}

const GRID_C_ALPHA: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
const GRID_ALPHA: [f64; 4] = [0.55, 0.66, 0.75, 0.9];
const GRID_C_BETA: [f64; 5] = [1e-10, 1e-5, 1e-2, 1e-1, 1.0];
const GRID_BETA: [f64; 4] = [0.01, 0.08, 0.2, 0.5];

impl ExperimentConfig {
    fn benchmark(name: &str, algorithms: Vec<Algorithm>, grid: Vec<GridPoint>) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            model: ModelKind::ExpSaturation,
            theta_true: default_theta(),
            covariates: CovariateLaw::default(),
            noise: NoiseLaw::default(),
            algorithms,
            grid,
            n: 10_000,
            replications: 100,
            init_radius: 10.0,
            checkpoints: None,
            master_seed: 1,
            projection: true,
            projection_radius: default_radius(),
            pivots: false,
            known_sigma2: default_sigma2(),
            layout: Layout::Step,
            failure_threshold: default_failure_threshold(),
        }
    }

    fn step_grid() -> Vec<GridPoint> {
        GRID_C_ALPHA
            .iter()
            .flat_map(|&c| {
                GRID_ALPHA
                    .iter()
                    .map(move |&a| GridPoint::new(c, a, 0.0, 0.0))
            })
            .collect()
    }

    /// Averaged Gauss-Newton over the `(c_α, α)` grid, `r₀ = 10`.
    pub fn table1() -> Self {
        Self::benchmark("table1", vec![Algorithm::Asgn], Self::step_grid())
    }

    /// Averaged stochastic gradient over the `(c_α, α)` grid, `r₀ = 10`.
    pub fn table2() -> Self {
        Self::benchmark("table2", vec![Algorithm::Asgd], Self::step_grid())
    }

    /// Gauss-Newton algorithms over the `(c_β, β)` grid, `r₀ = 5`.
    pub fn table3() -> Self {
        let grid = GRID_C_BETA
            .iter()
            .flat_map(|&c| {
                GRID_BETA
                    .iter()
                    .map(move |&b| GridPoint::new(1.0, 0.66, c, b))
            })
            .collect();
        let mut cfg = Self::benchmark("table3", vec![Algorithm::Asgn, Algorithm::Sgn], grid);
        cfg.init_radius = 5.0;
        cfg.layout = Layout::Regularization;
        cfg
    }

    /// MSE against sample size for the four methods at initial radius `r0`.
    pub fn curves(r0: f64) -> Self {
        let grid = vec![
            GridPoint::new(1.0, 0.66, 0.0, 0.0).only(&[Algorithm::Sgn, Algorithm::Asgn]),
            GridPoint::new(5.0, 0.66, 0.0, 0.0).only(&[Algorithm::Asgd]),
        ];
        let mut cfg = Self::benchmark(
            &format!("curves_r{r0}"),
            vec![Algorithm::Sgn, Algorithm::Asgn, Algorithm::Asgd],
            grid,
        );
        cfg.init_radius = r0;
        cfg
    }

    /// Pivot statistics at `n = 5000` over 1000 replications, `r₀ = 1`.
    pub fn normality() -> Self {
        let mut cfg = Self::benchmark(
            "normality",
            vec![Algorithm::Sgn, Algorithm::Asgn],
            vec![GridPoint::new(1.0, 0.66, 0.0, 0.0)],
        );
        cfg.n = 5000;
        cfg.replications = 1000;
        cfg.init_radius = 1.0;
        cfg.pivots = true;
        cfg
    }

    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            model: self.model,
            theta_true: self.theta_true.clone(),
            covariates: self.covariates,
            noise: self.noise,
            seed: self.master_seed,
        }
    }

    pub fn checkpoint_grid(&self) -> Vec<u64> {
        self.checkpoints.clone().unwrap_or_else(|| vec![self.n])
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("invalid experiment name `{}`", self.name));
        }
        self.synthetic_spec()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.grid.is_empty() {
            return bad("empty hyperparameter grid".into());
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(self.init_radius.is_finite() && self.init_radius >= 0.0) {
            return bad(format!(
                "init_radius must be nonnegative, got {}",
                self.init_radius
            ));
        }
        if let Some(cps) = &self.checkpoints {
            if cps.is_empty() || cps.windows(2).any(|w| w[0] >= w[1]) {
                return bad("checkpoints must be non-empty and strictly increasing".into());
            }
            if cps[0] < 1 || *cps.last().unwrap() > self.n {
                return bad(format!("checkpoints must lie in [1, {}]", self.n));
            }
        }
        if let Some(s2) = self.known_sigma2 {
            if !(s2.is_finite() && s2 > 0.0) {
                return bad(format!("known_sigma2 must be positive, got {s2}"));
            }
        }
        if !(0.0..=1.0).contains(&self.failure_threshold) {
            return bad(format!(
                "failure_threshold must lie in [0, 1], got {}",
                self.failure_threshold
            ));
        }
        if self.algorithms.contains(&crate::estimators::Algorithm::Rls)
            && self.model.covariate_dim() != self.model.param_dim()
        {
            return bad("RLS needs as many covariates as parameters".into());
        }
        for cell in self.cells() {
            cell.hp
                .validate()
                .map_err(|e| HarnessError::Config(format!("{}: {e}", cell.key)))?;
        }
        Ok(())
    }

    /// Expands the grid into cells, in grid order then algorithm order.
    pub fn cells(&self) -> Vec<Cell> {
        let q = self.model.param_dim();
        let mut out: Vec<Cell> = Vec::new();
        for point in &self.grid {
            for &algorithm in &self.algorithms {
                if point
                    .algorithms
                    .as_ref()
                    .is_some_and(|only| !only.contains(&algorithm))
                {
                    continue;
                }
                let mut hp = HyperParams::new(q)
                    .with_step(point.c_alpha, point.alpha)
                    .with_regularization(point.c_beta, point.beta);
                if self.projection {
                    hp = hp.with_projection(Ball::new(
                        self.theta_true.clone(),
                        self.projection_radius,
                    ));
                }
                let key = format!(
                    "{algorithm}|c_alpha={}|alpha={}|c_beta={}|beta={}",
                    point.c_alpha, point.alpha, point.c_beta, point.beta
                );
                if out.iter().any(|c| c.key == key) {
                    continue;
                }
                let mut point = point.clone();
                point.algorithms = None;
                out.push(Cell {
                    algorithm,
                    point,
                    hp,
                    key,
                });
            }
        }
        out
    }
}
