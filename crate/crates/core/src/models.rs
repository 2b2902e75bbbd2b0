//! Signal models, policy artifacts and the estimator that sits between samples.
//!
//! The signal obeys `dx = a x dt + dW` on `[0, T]` with unit diffusion. A
//! process with diffusion `b` is brought to this form by working in `t / b^2`
//! time before constructing a model. Every policy acts on the error signal
//! `e_t = x_t - x̂_t`, which restarts from zero at each sample, so the same
//! artifact types serve both process kinds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SamplingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    BrownianMotion,
    OrnsteinUhlenbeck,
}

/// Law of the tracked signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessModel {
    pub kind: ProcessKind,
    /// Drift coefficient `a` (1/time); zero for Brownian motion, negative is stable.
    pub drift_a: f64,
    /// Horizon `T` (time).
    pub horizon: f64,
    /// Known state at time zero.
    pub initial_state: f64,
}

impl ProcessModel {
    pub fn brownian(horizon: f64) -> Result<Self> {
        Self::new(ProcessKind::BrownianMotion, 0.0, horizon, 0.0)
    }

    pub fn ornstein_uhlenbeck(drift_a: f64, horizon: f64) -> Result<Self> {
        Self::new(ProcessKind::OrnsteinUhlenbeck, drift_a, horizon, 0.0)
    }

    pub fn new(kind: ProcessKind, drift_a: f64, horizon: f64, initial_state: f64) -> Result<Self> {
        let model = Self {
            kind,
            drift_a,
            horizon,
            initial_state,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_initial_state(mut self, x0: f64) -> Result<Self> {
        self.initial_state = x0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return invalid(format!("horizon must be positive and finite, got {}", self.horizon));
        }
        if !self.drift_a.is_finite() || !self.initial_state.is_finite() {
            return invalid("drift and initial state must be finite");
        }
        if self.kind == ProcessKind::BrownianMotion && self.drift_a != 0.0 {
            return invalid("Brownian motion has zero drift");
        }
        Ok(())
    }

    /// Drift rescaled to the unit horizon, `a T`.
    pub fn normalized_drift(&self) -> f64 {
        normalize_ou(self.drift_a, self.horizon)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProcessKind::BrownianMotion => "brownian",
            ProcessKind::OrnsteinUhlenbeck => "ornstein-uhlenbeck",
        }
    }
}

/// Drift on the unit horizon: `ā = a T`.
///
/// Under `t̄ = t / T` and `x̄ = x / sqrt(T)` the process keeps unit diffusion and
/// gets drift `ā`; distortions scale by `T^2`, thresholds by `sqrt(T)`.
pub fn normalize_ou(a: f64, horizon: f64) -> f64 {
    a * horizon
}

/// Truncation control for every infinite series in [`crate::series`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_terms: 200,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_terms == 0 {
            return invalid("series tolerance must be positive and term cap at least 1");
        }
        Ok(())
    }
}

/// How sample triggers are read off a gridded threshold table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridTrigger {
    /// Time-varying envelope checked at each grid time: sample once `|e_t| >= threshold(t)`.
    Envelope,
    /// Level fixed at each stage start `s` as `threshold(s)`, monitored continuously.
    StageStart,
}

/// Threshold table indexed by remaining budget.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedThresholds {
    pub time_grid: Vec<f64>,
    /// `thresholds[r - 1][j]` applies with `r` samples left at `time_grid[j]`.
    pub thresholds: Vec<Vec<f64>>,
    pub trigger: GridTrigger,
    /// Drift the table was computed for.
    pub drift_a: f64,
}

impl GriddedThresholds {
    pub fn threshold_at(&self, remaining: usize, t: f64) -> f64 {
        crate::numerics::interp_linear(&self.time_grid, &self.thresholds[remaining - 1], t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyVariant {
    UniformDeterministic {
        times: Vec<f64>,
    },
    /// Stage coefficients indexed by remaining budget: entry `r - 1` is used with `r` samples left.
    DeltaThresholds {
        rho: Vec<f64>,
        c: Vec<f64>,
        lambda_star: Vec<f64>,
    },
    /// `theta[0] = 1`; `gamma[r - 1]` is the envelope slope with `r` samples left.
    OptimalEnvelope {
        theta: Vec<f64>,
        gamma: Vec<f64>,
    },
    GriddedThresholds(GriddedThresholds),
}

/// A computed sampling policy with a hard budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolicyDocument", try_from = "PolicyDocument")]
pub struct PolicyArtifact {
    pub budget: usize,
    pub horizon: f64,
    pub variant: PolicyVariant,
}

impl PolicyArtifact {
    pub fn new(budget: usize, horizon: f64, variant: PolicyVariant) -> Result<Self> {
        let p = Self {
            budget,
            horizon,
            variant,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn kind(&self) -> &'static str {
        match self.variant {
            PolicyVariant::UniformDeterministic { .. } => "uniform_deterministic",
            PolicyVariant::DeltaThresholds { .. } => "delta_thresholds",
            PolicyVariant::OptimalEnvelope { .. } => "optimal_envelope",
            PolicyVariant::GriddedThresholds(_) => "gridded_thresholds",
        }
    }

    pub fn id(&self) -> String {
        format!("{}/N={}", self.kind(), self.budget)
    }

    /// The same policy with only `k <= budget` samples.
    ///
    /// Stage-indexed policies keep their first `k` stages, since those are the ones
    /// used with `k` or fewer samples left; uniform times are recomputed.
    pub fn restrict_budget(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.budget {
            return invalid(format!("budget {k} must lie in 1..={}", self.budget));
        }
        let variant = match &self.variant {
            PolicyVariant::UniformDeterministic { .. } => PolicyVariant::UniformDeterministic {
                times: (1..=k).map(|i| i as f64 * self.horizon / (k + 1) as f64).collect(),
            },
            PolicyVariant::DeltaThresholds { rho, c, lambda_star } => PolicyVariant::DeltaThresholds {
                rho: rho[..k].to_vec(),
                c: c[..k].to_vec(),
                lambda_star: lambda_star[..k].to_vec(),
            },
            PolicyVariant::OptimalEnvelope { theta, gamma } => PolicyVariant::OptimalEnvelope {
                theta: theta[..=k].to_vec(),
                gamma: gamma[..k].to_vec(),
            },
            PolicyVariant::GriddedThresholds(g) => PolicyVariant::GriddedThresholds(GriddedThresholds {
                thresholds: g.thresholds[..k].to_vec(),
                ..g.clone()
            }),
        };
        Self::new(k, self.horizon, variant)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SamplingError::InvalidPolicy(m));
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        let nonneg = |name: &str, v: &[f64]| -> Result<()> {
            match v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                Some(i) => bad(format!("{name}[{i}] = {} is not finite and non-negative", v[i])),
                None => Ok(()),
            }
        };
        let n = self.budget;
        match &self.variant {
            PolicyVariant::UniformDeterministic { times } => {
                nonneg("times", times)?;
                if times.len() != n {
                    return bad(format!("expected {n} sample times, got {}", times.len()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("sample times must be strictly increasing".into());
                }
                if times[0] <= 0.0 || times[n - 1] > self.horizon {
                    return bad("sample times must lie in (0, T]".into());
                }
            }
            PolicyVariant::DeltaThresholds { rho, c, lambda_star } => {
                nonneg("rho", rho)?;
                nonneg("c", c)?;
                nonneg("lambda_star", lambda_star)?;
                if rho.len() != n || c.len() != n || lambda_star.len() != n {
                    return bad(format!("delta coefficients must all have length {n}"));
                }
            }
            PolicyVariant::OptimalEnvelope { theta, gamma } => {
                nonneg("theta", theta)?;
                nonneg("gamma", gamma)?;
                if theta.len() != n + 1 || gamma.len() != n {
                    return bad(format!("envelope needs {} theta and {n} gamma values", n + 1));
                }
                if theta[0] != 1.0 {
                    return bad("theta[0] must be 1".into());
                }
                if theta.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("theta must be strictly decreasing".into());
                }
            }
            PolicyVariant::GriddedThresholds(g) => {
                nonneg("time_grid", &g.time_grid)?;
                if !g.drift_a.is_finite() {
                    return bad("drift must be finite".into());
                }
                if g.time_grid.len() < 2 || g.time_grid.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("time grid must be strictly increasing with at least two points".into());
                }
                if g.thresholds.len() != n {
                    return bad(format!("expected {n} threshold rows, got {}", g.thresholds.len()));
                }
                for (r, row) in g.thresholds.iter().enumerate() {
                    nonneg(&format!("thresholds[{r}]"), row)?;
                    if row.len() != g.time_grid.len() {
                        return bad(format!("threshold row {r} does not match the time grid"));
                    }
                    let scale = row.iter().cloned().fold(0.0, f64::max).max(1e-300);
                    if let Some(j) = row.windows(2).position(|w| w[1] > w[0] + 1e-9 * scale) {
                        return bad(format!(
                            "threshold row {r} increases in time at index {j} ({} -> {})",
                            row[j],
                            row[j + 1]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// JSON layout of a [`PolicyArtifact`]: `{kind, budget, horizon, coefficients, grid}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyDocument {
    pub kind: String,
    pub budget: usize,
    pub horizon: f64,
    pub coefficients: Option<Coefficients>,
    pub grid: Option<GridDocument>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDocument {
    pub time_grid: Vec<f64>,
    pub thresholds: Vec<Vec<f64>>,
    pub trigger: GridTrigger,
    pub drift_a: f64,
}

impl From<PolicyArtifact> for PolicyDocument {
    fn from(p: PolicyArtifact) -> Self {
        let kind = p.kind().to_string();
        let (coefficients, grid) = match p.variant {
            PolicyVariant::UniformDeterministic { times } => (
                Some(Coefficients {
                    times: Some(times),
                    ..Default::default()
                }),
                None,
            ),
            PolicyVariant::DeltaThresholds { rho, c, lambda_star } => (
                Some(Coefficients {
                    rho: Some(rho),
                    c: Some(c),
                    lambda_star: Some(lambda_star),
                    ..Default::default()
                }),
                None,
            ),
            PolicyVariant::OptimalEnvelope { theta, gamma } => (
                Some(Coefficients {
                    theta: Some(theta),
                    gamma: Some(gamma),
                    ..Default::default()
                }),
                None,
            ),
            PolicyVariant::GriddedThresholds(g) => (
                None,
                Some(GridDocument {
                    time_grid: g.time_grid,
                    thresholds: g.thresholds,
                    trigger: g.trigger,
                    drift_a: g.drift_a,
                }),
            ),
        };
        PolicyDocument {
            kind,
            budget: p.budget,
            horizon: p.horizon,
            coefficients,
            grid,
        }
    }
}

impl TryFrom<PolicyDocument> for PolicyArtifact {
    type Error = SamplingError;

    fn try_from(doc: PolicyDocument) -> Result<Self> {
        let missing = |f: &str| SamplingError::InvalidPolicy(format!("{} policy missing `{f}`", doc.kind));
        let coef = doc.coefficients.clone().unwrap_or_default();
        let variant = match doc.kind.as_str() {
            "uniform_deterministic" => PolicyVariant::UniformDeterministic {
                times: coef.times.ok_or_else(|| missing("times"))?,
            },
            "delta_thresholds" => PolicyVariant::DeltaThresholds {
                rho: coef.rho.ok_or_else(|| missing("rho"))?,
                c: coef.c.ok_or_else(|| missing("c"))?,
                lambda_star: coef.lambda_star.ok_or_else(|| missing("lambda_star"))?,
            },
            "optimal_envelope" => PolicyVariant::OptimalEnvelope {
                theta: coef.theta.ok_or_else(|| missing("theta"))?,
                gamma: coef.gamma.ok_or_else(|| missing("gamma"))?,
            },
            "gridded_thresholds" => {
                let g = doc.grid.clone().ok_or_else(|| missing("grid"))?;
                PolicyVariant::GriddedThresholds(GriddedThresholds {
                    time_grid: g.time_grid,
                    thresholds: g.thresholds,
                    trigger: g.trigger,
                    drift_a: g.drift_a,
                })
            }
            other => return Err(SamplingError::InvalidPolicy(format!("unknown policy kind `{other}`"))),
        };
        PolicyArtifact::new(doc.budget, doc.horizon, variant)
    }
}

/// Monte Carlo estimate of a policy's distortion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub policy_id: String,
    pub seed: u64,
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Estimate of `E ∫_0^T (x_s - x̂_s)^2 ds`.
    pub mean_distortion: f64,
    pub std_error: f64,
    /// `mean_distortion / (T^2 / 2)`.
    pub distortion_coefficient: f64,
    pub coefficient_std_error: f64,
    /// Samples taken strictly before `T`, averaged over paths.
    pub mean_samples_used: f64,
    pub samples_std_error: f64,
}

/// MMSE estimate of `x_t` from the samples received up to `t`.
///
/// Zero-order hold for Brownian motion and an exponential hold
/// `x_τ e^{a (t - τ)}` for Ornstein-Uhlenbeck; before the first sample the
/// known initial state is propagated the same way. Samples later than `t` are
/// ignored, so the estimate is right-continuous and jumps to the sampled
/// value exactly at each sample time.
pub fn mmse_reconstruct(model: &ProcessModel, samples: &[(f64, f64)], t: f64) -> Result<f64> {
    model.validate()?;
    if !(0.0..=model.horizon).contains(&t) {
        return invalid(format!("t = {t} outside [0, {}]", model.horizon));
    }
    if samples.windows(2).any(|w| w[1].0 < w[0].0) {
        return invalid("sample times must be sorted");
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) {
        return invalid("samples must be finite");
    }
    let latest = samples.iter().take_while(|s| s.0 <= t).last();
    let (t0, x0) = latest.copied().unwrap_or((0.0, model.initial_state));
    Ok(match model.kind {
        ProcessKind::BrownianMotion => x0,
        ProcessKind::OrnsteinUhlenbeck => x0 * (model.drift_a * (t - t0)).exp(),
    })
}
