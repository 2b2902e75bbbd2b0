//! Sampling policies for Brownian motion: uniform, threshold (Delta) and optimal-stopping envelopes.
//!
//! Distortions are reported as coefficients of `T^2 / 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SamplingError};
use crate::models::{PolicyArtifact, PolicyVariant, SeriesConfig};
use crate::numerics::golden_section;
use crate::series::{delta_from_lambda, firing_probability, stage_cost, LambdaParam};

/// Search settings for the one-dimensional minimisation over `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_points: usize,
    pub rel_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lambda_min: 1e-2,
            lambda_max: 1e2,
            grid_points: 400,
            rel_tol: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_max > self.lambda_min && self.lambda_max.is_finite()) {
            return invalid("need 0 < lambda_min < lambda_max");
        }
        if self.grid_points < 3 {
            return invalid("grid_points must be at least 3");
        }
        if !(self.rel_tol > 0.0) {
            return invalid("rel_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmPolicyResult {
    pub policy: PolicyArtifact,
    /// Distortion as a coefficient of `T^2 / 2`.
    pub analytic_distortion: f64,
    /// Expected number of samples taken before `T`, when known in closed form.
    pub expected_samples: Option<f64>,
}

impl BmPolicyResult {
    pub fn absolute_distortion(&self) -> f64 {
        let t = self.policy.horizon;
        self.analytic_distortion * t * t / 2.0
    }
}

fn check_budget(horizon: f64, n: usize) -> Result<()> {
    if n == 0 {
        return invalid("budget N must be at least 1");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    Ok(())
}

/// Uniform sampling `d_i = i T / (N + 1)`, with coefficient `1 / (N + 1)`.
pub fn deterministic_policy(horizon: f64, n: usize) -> Result<BmPolicyResult> {
    check_budget(horizon, n)?;
    let times = (1..=n).map(|i| i as f64 * horizon / (n + 1) as f64).collect();
    Ok(BmPolicyResult {
        policy: PolicyArtifact::new(n, horizon, PolicyVariant::UniformDeterministic { times })?,
        analytic_distortion: 1.0 / (n + 1) as f64,
        expected_samples: Some(n as f64),
    })
}

/// How the continuation value enters the threshold recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaConvention {
    /// `c_k = min φ + (1/2 - c_{k-1}) ψ` with `c_0 = 1/2`, the tabulated form.
    #[default]
    Tabulated,
    /// `c_k = min φ + (1/2 - c_{k-1}/2) ψ` with `c_0 = 1`: the true cost of the
    /// threshold policy, since the remaining `k - 1` samples cost `c_{k-1} R^2 / 2`
    /// over the residual time `R`.
    Exact,
}

impl DeltaConvention {
    fn seed(self) -> f64 {
        match self {
            Self::Tabulated => 0.5,
            Self::Exact => 1.0,
        }
    }

    fn kappa(self, previous: f64) -> f64 {
        match self {
            Self::Tabulated => 0.5 - previous,
            Self::Exact => 0.5 - 0.5 * previous,
        }
    }
}

/// Minimise `φ(λ) + κ ψ(λ)` over `λ`. Returns `(λ*, minimum)`.
pub fn minimize_stage_cost(kappa: f64, cfg: &SeriesConfig, opt: &OptimizerConfig) -> Result<(f64, f64)> {
    opt.validate()?;
    let (lo, hi) = (opt.lambda_min.ln(), opt.lambda_max.ln());
    let n = opt.grid_points;
    let step = (hi - lo) / (n - 1) as f64;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lam = LambdaParam::new((lo + step * i as f64).exp())?;
            stage_cost(lam, kappa, cfg)
        })
        .collect::<Result<_>>()?;
    let fail = |reason: &str| SamplingError::Optimizer {
        lo: opt.lambda_min,
        hi: opt.lambda_max,
        reason: reason.to_string(),
    };
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(fail("objective is not finite on the scan grid"));
        }
        if *v < values[best] {
            best = i;
        }
    }
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values[best];
    if spread < 1e-12 {
        return Err(fail("objective is flat over the bracket"));
    }
    if best == 0 || best == n - 1 {
        return Err(fail("minimum sits on the edge of the bracket"));
    }
    let a = lo + step * (best - 1) as f64;
    let b = lo + step * (best + 1) as f64;
    let mut err = None;
    let (x, fx) = golden_section(
        |u| match LambdaParam::new(u.exp()).and_then(|l| stage_cost(l, kappa, cfg)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        opt.rel_tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok((x.exp(), fx))
}

/// Optimal per-stage thresholds by the tabulated recursion.
pub fn delta_recursion(
    horizon: f64,
    n: usize,
    cfg: &SeriesConfig,
    opt: &OptimizerConfig,
) -> Result<BmPolicyResult> {
    delta_recursion_with(horizon, n, DeltaConvention::Tabulated, cfg, opt)
}

/// Threshold recursion under a chosen convention.
///
/// Entry `r - 1` of each output sequence is the stage with `r` samples left:
/// that stage fires when `|e| >= ρ_r sqrt(T - ζ)`, where `ζ` is the time of the last sample.
pub fn delta_recursion_with(
    horizon: f64,
    n: usize,
    convention: DeltaConvention,
    cfg: &SeriesConfig,
    opt: &OptimizerConfig,
) -> Result<BmPolicyResult> {
    check_budget(horizon, n)?;
    cfg.validate()?;
    let mut c = Vec::with_capacity(n);
    let mut lambda_star = Vec::with_capacity(n);
    let mut previous = convention.seed();
    for _ in 0..n {
        let (lam, ck) = minimize_stage_cost(convention.kappa(previous), cfg, opt)?;
        c.push(ck);
        lambda_star.push(lam);
        previous = ck;
    }
    let rho: Vec<f64> = lambda_star.iter().map(|&l| delta_from_lambda(l, 1.0)).collect();
    let expected = delta_expected_samples(n, &lambda_star, cfg)?;
    let analytic = match convention {
        DeltaConvention::Tabulated => c[n - 1],
        DeltaConvention::Exact => delta_policy_distortion(&rho, cfg)?,
    };
    Ok(BmPolicyResult {
        policy: PolicyArtifact::new(
            n,
            horizon,
            PolicyVariant::DeltaThresholds {
                rho,
                c,
                lambda_star,
            },
        )?,
        analytic_distortion: analytic,
        expected_samples: expected.last().copied(),
    })
}

/// `E[Ξ_k] = P[τ_k < T] (1 + E[Ξ_{k-1}])` for `k = 1..N`, using `λ*_k` for the stage with `k` samples left.
pub fn delta_expected_samples(n: usize, lambda_stars: &[f64], cfg: &SeriesConfig) -> Result<Vec<f64>> {
    if lambda_stars.len() < n {
        return invalid(format!("need {n} stage parameters, got {}", lambda_stars.len()));
    }
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &lam in &lambda_stars[..n] {
        let p = firing_probability(LambdaParam::new(lam)?, cfg)?;
        prev = p * (1.0 + prev);
        out.push(prev);
    }
    Ok(out)
}

/// True distortion coefficient of a threshold policy with stage levels `ρ_r sqrt(T - ζ)`.
///
/// After a sample at `τ` the remaining `r - 1` stages cost `J_{r-1} (T - τ)^2 / 2`,
/// so `J_r = φ(λ_r) + (1/2 - J_{r-1}/2) ψ(λ_r)` with `J_0 = 1`.
pub fn delta_policy_distortion(rho: &[f64], cfg: &SeriesConfig) -> Result<f64> {
    let mut j = 1.0;
    for &r in rho {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("threshold coefficient must be positive, got {r}"));
        }
        let lam = LambdaParam::from_delta(r, 1.0)?;
        j = stage_cost(lam, 0.5 - 0.5 * j, cfg)?;
    }
    Ok(j)
}

/// `A(β) = ((5 + β) - sqrt((5 + β)^2 - 24)) / 4`.
///
/// `A` is the root making `g(x, t) - 2x^2 (T - t) - (1 - β)(T - t)^2` a perfect
/// square for `g = A x^4 / 3 - 2 (A - 1) x^2 (T - t) + ...`; the discriminant is
/// checked on the way out.
pub fn snell_constant(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return invalid(format!("beta must lie in (0, 1], got {beta}"));
    }
    let s = 5.0 + beta;
    let radicand = s * s - 24.0;
    let a = (s - radicand.sqrt()) / 4.0;
    // Quadratic form in (x^2, T - t): coefficients A/3, 2A - 2, A - 1 + β.
    let disc = (2.0 * a - 2.0).powi(2) - 4.0 * (a / 3.0) * (a - 1.0 + beta);
    if disc.abs() > 1e-12 {
        return Err(SamplingError::Optimizer {
            lo: 0.0,
            hi: 1.0,
            reason: format!("perfect-square condition fails at beta = {beta} (discriminant {disc:e})"),
        });
    }
    Ok(a)
}

/// Optimal stopping envelopes `|e| = sqrt(γ_r (T - t))` with `θ_0 = 1`, `θ_k = 1 - A(θ_{k-1})`,
/// `γ_k = sqrt(3 (θ_{k-1} - θ_k) / (1 - θ_k))`.
pub fn optimal_envelope_recursion(horizon: f64, n: usize) -> Result<BmPolicyResult> {
    check_budget(horizon, n)?;
    let (theta, gamma) = envelope_coefficients(n)?;
    let coefficient = theta[n];
    Ok(BmPolicyResult {
        policy: PolicyArtifact::new(n, horizon, PolicyVariant::OptimalEnvelope { theta, gamma })?,
        analytic_distortion: coefficient,
        expected_samples: None,
    })
}

/// `(θ_0..θ_N, γ_1..γ_N)`.
pub fn envelope_coefficients(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut theta = vec![1.0];
    let mut gamma = Vec::with_capacity(n);
    for k in 1..=n {
        let prev = theta[k - 1];
        let next = 1.0 - snell_constant(prev)?;
        gamma.push((3.0 * (prev - next) / (1.0 - next)).sqrt());
        theta.push(next);
    }
    Ok((theta, gamma))
}

/// Envelope level with `γ` at time `t`: `sqrt(γ (T - t))`.
pub fn envelope_level(gamma: f64, horizon: f64, t: f64) -> f64 {
    (gamma * (horizon - t).max(0.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_policy() {
        let r = deterministic_policy(1.0, 3).unwrap();
        match &r.policy.variant {
            PolicyVariant::UniformDeterministic { times } => assert_eq!(times, &vec![0.25, 0.5, 0.75]),
            _ => unreachable!(),
        }
        assert_eq!(r.analytic_distortion, 0.25);
        assert_eq!(deterministic_policy(1.0, 1).unwrap().analytic_distortion, 0.5);
        assert!((deterministic_policy(2.0, 1).unwrap().absolute_distortion() - 1.0).abs() < 1e-15);
        assert!(deterministic_policy(1.0, 0).is_err());
    }

    #[test]
    fn single_stage_optimum() {
        let (lam, c) = minimize_stage_cost(0.0, &SeriesConfig::default(), &OptimizerConfig::default()).unwrap();
        assert!((c - 0.3953).abs() < 5e-4);
        assert!((delta_from_lambda(lam, 1.0) - 0.9391).abs() < 1e-3);
    }

    #[test]
    fn tabulated_recursion_values() {
        let r = delta_recursion(1.0, 5, &SeriesConfig::default(), &OptimizerConfig::default()).unwrap();
        let PolicyVariant::DeltaThresholds { rho, c, .. } = &r.policy.variant else {
            unreachable!()
        };
        let c_tab = [0.3953, 0.3471, 0.3219, 0.3078, 0.2995];
        let rho_tab = [0.9391, 0.8743, 0.8401, 0.8208, 0.8094];
        for k in 0..5 {
            assert!((c[k] - c_tab[k]).abs() < 5e-4, "c[{k}] = {}", c[k]);
            assert!((rho[k] - rho_tab[k]).abs() < 1e-3, "rho[{k}] = {}", rho[k]);
        }
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn exact_convention_beats_tabulated_beyond_one_sample() {
        let cfg = SeriesConfig::default();
        let opt = OptimizerConfig::default();
        let tab = delta_recursion_with(1.0, 3, DeltaConvention::Tabulated, &cfg, &opt).unwrap();
        let ex = delta_recursion_with(1.0, 3, DeltaConvention::Exact, &cfg, &opt).unwrap();
        let PolicyVariant::DeltaThresholds { rho, .. } = &tab.policy.variant else {
            unreachable!()
        };
        let tab_true = delta_policy_distortion(rho, &cfg).unwrap();
        assert!(ex.analytic_distortion <= tab_true + 1e-9);
        assert!(ex.analytic_distortion < 0.25);
    }

    #[test]
    fn expected_samples_base_and_bound() {
        let cfg = SeriesConfig::default();
        let r = delta_recursion(1.0, 5, &cfg, &OptimizerConfig::default()).unwrap();
        let PolicyVariant::DeltaThresholds { lambda_star, .. } = &r.policy.variant else {
            unreachable!()
        };
        let e = delta_expected_samples(5, lambda_star, &cfg).unwrap();
        let p1 = firing_probability(LambdaParam::new(lambda_star[0]).unwrap(), &cfg).unwrap();
        assert_eq!(e[0], p1);
        for (k, v) in e.iter().enumerate() {
            assert!(*v >= 0.0 && *v <= (k + 1) as f64);
        }
    }

    #[test]
    fn snell_constant_values() {
        assert!((snell_constant(1.0).unwrap() - (3.0 - 3f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(snell_constant(0.0).is_err());
        assert!(snell_constant(1.1).is_err());
        // dA/dβ = (1 - (5 + β) / sqrt((5 + β)^2 - 24)) / 4 < 0.
        let mut last = f64::INFINITY;
        for i in 1..=100 {
            let a = snell_constant(i as f64 / 100.0).unwrap();
            assert!(a < last);
            last = a;
        }
    }

    #[test]
    fn envelope_recursion_values() {
        let r = optimal_envelope_recursion(1.0, 2).unwrap();
        let PolicyVariant::OptimalEnvelope { theta, gamma } = &r.policy.variant else {
            unreachable!()
        };
        assert!((theta[1] - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((gamma[0] - 3f64.sqrt()).abs() < 1e-12);
        assert!((theta[2] - 0.205_887).abs() < 1e-5);
        assert!((gamma[1] - 0.777_80).abs() < 1e-4);
    }

    #[test]
    fn envelope_limits() {
        let (theta, _) = envelope_coefficients(100).unwrap();
        assert!(theta.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        assert!(theta[100] < 1e-2 * theta[1]);
        let scaled = 41.0 * theta[40];
        assert!((0.30..=0.40).contains(&scaled));
        assert_eq!(envelope_level(3f64.sqrt(), 1.0, 1.0), 0.0);
    }
}
