//! Monte Carlo oracle for sampling policies.
//!
//! Paths are independent and each draws from its own ChaCha stream
//! (`seed`, path index), and per-path results are reduced in path order with a
//! fixed pairwise tree. Reports are therefore identical for any number of
//! worker threads.

mod engine;
mod hitting;
mod poisson;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SamplingError};
use crate::models::{
    GridTrigger, GriddedThresholds, PolicyArtifact, PolicyVariant, ProcessKind, ProcessModel, SimulationReport,
};
use crate::numerics::mean_and_se;
use engine::{Advance, Monitor, PathRng, Step};

pub use hitting::{simulate_hitting_statistics, HittingStats};
pub use poisson::{poisson_demo, poisson_demo_paths, PoissonDemoReport, PoissonPath};

/// Bisection depth below a time step when locating threshold crossings.
const REFINE_DEPTH: i32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Pair each path with its mirror image; the pair mean is the sampling unit.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            seed,
            antithetic: false,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        if self.n_paths == 0 {
            return invalid("n_paths must be at least 1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if self.dt > horizon / 100.0 * (1.0 + 1e-12) {
            return invalid(format!("dt = {} exceeds T/100 = {}", self.dt, horizon / 100.0));
        }
        if self.antithetic && self.n_paths % 2 == 1 {
            return invalid("antithetic sampling needs an even number of paths");
        }
        Ok(())
    }

    fn rng(&self, path: usize) -> PathRng {
        if self.antithetic {
            PathRng::new(self.seed, (path / 2) as u64, path % 2 == 1)
        } else {
            PathRng::new(self.seed, path as u64, false)
        }
    }

    /// Collapse per-path values into i.i.d. units (pair means under antithetics).
    fn units(&self, values: Vec<f64>) -> Vec<f64> {
        if self.antithetic {
            values.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
        } else {
            values
        }
    }
}

/// One row of a path trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub x_hat: f64,
    pub cumulative_distortion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PathOutcome {
    distortion: f64,
    samples: usize,
}

/// How the policy picks its sample times at run time.
enum Rule<'a> {
    Uniform(&'a [f64]),
    /// Level `ρ_r sqrt(T - ζ)`, fixed for the stage.
    Delta(&'a [f64]),
    /// Level `sqrt(γ_r (T - t))`.
    Envelope(&'a [f64]),
    /// Level `threshold_r(ζ)`, fixed for the stage.
    StageStart(&'a GriddedThresholds),
    /// `|e| >= threshold_r(t_n)` checked at the table's epochs only.
    Epochs(&'a GriddedThresholds),
}

fn rule_for<'a>(model: &ProcessModel, policy: &'a PolicyArtifact) -> Result<Rule<'a>> {
    let incompatible = || SamplingError::IncompatiblePolicy {
        policy: policy.id(),
        model: model.kind_name().to_string(),
    };
    let h = model.horizon;
    if (policy.horizon - h).abs() > 1e-12 * h {
        return Err(SamplingError::InvalidArgument(format!(
            "policy horizon {} differs from model horizon {h}",
            policy.horizon
        )));
    }
    Ok(match &policy.variant {
        PolicyVariant::UniformDeterministic { times } => Rule::Uniform(times),
        PolicyVariant::DeltaThresholds { rho, .. } => {
            if model.kind != ProcessKind::BrownianMotion {
                return Err(incompatible());
            }
            Rule::Delta(rho)
        }
        PolicyVariant::OptimalEnvelope { gamma, .. } => {
            if model.kind != ProcessKind::BrownianMotion {
                return Err(incompatible());
            }
            Rule::Envelope(gamma)
        }
        PolicyVariant::GriddedThresholds(g) => {
            let scale = g.drift_a.abs().max(model.drift_a.abs()).max(1.0);
            if (g.drift_a - model.drift_a).abs() > 1e-12 * scale {
                return Err(incompatible());
            }
            let (first, last) = (g.time_grid[0], g.time_grid[g.time_grid.len() - 1]);
            if first.abs() > 1e-12 * h || (last - h).abs() > 1e-12 * h {
                return Err(SamplingError::InvalidPolicy(format!(
                    "threshold table spans [{first}, {last}], expected [0, {h}]"
                )));
            }
            match g.trigger {
                GridTrigger::StageStart => Rule::StageStart(g),
                GridTrigger::Envelope => Rule::Epochs(g),
            }
        }
    })
}

/// Points at which a path is stepped: a uniform grid of size at most `dt`, merged with `extra`.
fn breakpoints(horizon: f64, dt: f64, extra: &[f64]) -> Vec<f64> {
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (1..steps).map(|k| k as f64 * horizon / steps as f64).collect();
    pts.extend(extra.iter().copied().filter(|&s| s > 0.0 && s < horizon));
    pts.push(horizon);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * horizon);
    pts
}

struct Tracer<'a> {
    rows: &'a mut Vec<TraceRow>,
    a: f64,
    anchor: (f64, f64),
}

impl Tracer<'_> {
    fn x_hat(&self, t: f64) -> f64 {
        self.anchor.1 * (self.a * (t - self.anchor.0)).exp()
    }

    fn push(&mut self, t: f64, e: f64, cumulative: f64) {
        let x_hat = self.x_hat(t);
        self.rows.push(TraceRow {
            t,
            x: x_hat + e,
            x_hat,
            cumulative_distortion: cumulative,
        });
    }
}

struct PathSim<'a> {
    model: &'a ProcessModel,
    rule: &'a Rule<'a>,
    cfg: &'a SimConfig,
    /// Breakpoints for rules without intra-step monitoring.
    grid: &'a [f64],
}

impl PathSim<'_> {
    fn run(&self, path: usize, trace: Option<&mut Vec<TraceRow>>) -> PathOutcome {
        let a = self.model.drift_a;
        let horizon = self.model.horizon;
        let mut rng = self.cfg.rng(path);
        let mut tracer = trace.map(|rows| Tracer {
            rows,
            a,
            anchor: (0.0, self.model.initial_state),
        });
        if let Some(tr) = tracer.as_mut() {
            tr.push(0.0, 0.0, 0.0);
        }
        let budget = match self.rule {
            Rule::Uniform(times) => times.len(),
            Rule::Delta(v) | Rule::Envelope(v) => v.len(),
            Rule::StageStart(g) | Rule::Epochs(g) => g.thresholds.len(),
        };
        let mut dist = 0.0;
        let mut samples = 0;
        let mut remaining = budget;
        let mut t = 0.0;
        let mut e = 0.0;
        let take_sample = |t: f64, e: f64, dist: f64, tracer: &mut Option<Tracer>| {
            if let Some(tr) = tracer.as_mut() {
                let x = tr.x_hat(t) + e;
                tr.anchor = (t, x);
                tr.push(t, 0.0, dist);
            }
        };

        match self.rule {
            Rule::Uniform(_) | Rule::Epochs(_) => {
                let mut uniform_idx = 0;
                let mut epoch_idx = 1;
                for &tn in self.grid {
                    let step = Step::new(a, tn - t);
                    let en = step.sample(e, &mut rng);
                    dist += 0.5 * (tn - t) * (e * e + en * en);
                    t = tn;
                    e = en;
                    if let Some(tr) = tracer.as_mut() {
                        tr.push(t, e, dist);
                    }
                    let fire = match self.rule {
                        Rule::Uniform(times) => {
                            let hit = uniform_idx < times.len() && (times[uniform_idx] - t).abs() <= 1e-12 * horizon;
                            if hit {
                                uniform_idx += 1;
                            }
                            hit
                        }
                        Rule::Epochs(g) => {
                            let at_epoch =
                                epoch_idx < g.time_grid.len() && (g.time_grid[epoch_idx] - t).abs() <= 1e-12 * horizon;
                            if at_epoch {
                                let thr = g.thresholds[remaining.max(1) - 1][epoch_idx];
                                epoch_idx += 1;
                                remaining > 0 && e.abs() >= thr
                            } else {
                                false
                            }
                        }
                        _ => unreachable!(),
                    };
                    if fire && remaining > 0 {
                        remaining -= 1;
                        if t < horizon {
                            samples += 1;
                        }
                        take_sample(t, e, dist, &mut tracer);
                        e = 0.0;
                    }
                }
            }
            Rule::Delta(_) | Rule::Envelope(_) | Rule::StageStart(_) => {
                let steps = (horizon / self.cfg.dt - 1e-9).ceil().max(1.0) as usize;
                let h = horizon / steps as f64;
                let full = Step::new(a, h);
                let mut monitor = Monitor::new(a, h / 2f64.powi(REFINE_DEPTH));
                let mut zeta = 0.0;
                for k in 1..=steps {
                    let tn = if k == steps { horizon } else { k as f64 * h };
                    let en = full.sample(e, &mut rng);
                    if remaining == 0 {
                        dist += 0.5 * (tn - t) * (e * e + en * en);
                        t = tn;
                        e = en;
                        if let Some(tr) = tracer.as_mut() {
                            tr.push(t, e, dist);
                        }
                        continue;
                    }
                    monitor.pending.push((tn, en));
                    loop {
                        let level = |s: f64| match self.rule {
                            Rule::Delta(rho) => rho[remaining - 1] * (horizon - zeta).max(0.0).sqrt(),
                            Rule::Envelope(gamma) => (gamma[remaining - 1] * (horizon - s).max(0.0)).sqrt(),
                            Rule::StageStart(g) => g.threshold_at(remaining, zeta),
                            _ => unreachable!(),
                        };
                        let outcome = if remaining == 0 {
                            monitor.advance(&mut t, &mut e, |_| f64::INFINITY, &mut rng, |t0, e0, t1, e1| {
                                dist += 0.5 * (t1 - t0) * (e0 * e0 + e1 * e1)
                            })
                        } else {
                            monitor.advance(&mut t, &mut e, level, &mut rng, |t0, e0, t1, e1| {
                                dist += 0.5 * (t1 - t0) * (e0 * e0 + e1 * e1)
                            })
                        };
                        match outcome {
                            Advance::Done => break,
                            Advance::Crossed(tau, etau) => {
                                remaining -= 1;
                                if tau < horizon {
                                    samples += 1;
                                }
                                take_sample(tau, etau, dist, &mut tracer);
                                monitor.reset(tau, etau);
                                zeta = tau;
                                e = 0.0;
                            }
                        }
                    }
                    if let Some(tr) = tracer.as_mut() {
                        tr.push(t, e, dist);
                    }
                }
            }
        }
        PathOutcome {
            distortion: dist,
            samples,
        }
    }
}

fn extra_breakpoints(rule: &Rule) -> Vec<f64> {
    match rule {
        Rule::Uniform(times) => times.to_vec(),
        Rule::Epochs(g) => g.time_grid.clone(),
        _ => Vec::new(),
    }
}

fn warn_if_coarse(rule: &Rule, horizon: f64, dt: f64) {
    let level_near_end = match rule {
        Rule::Envelope(gamma) => gamma.iter().cloned().fold(f64::INFINITY, f64::min) * 0.01 * horizon,
        Rule::Delta(rho) => {
            let r = rho.iter().cloned().fold(f64::INFINITY, f64::min);
            r * r * 0.01 * horizon
        }
        _ => return,
    }
    .sqrt();
    // Crossings are located down to dt / 2^REFINE_DEPTH.
    let ratio = (dt / 2f64.powi(REFINE_DEPTH)).sqrt() / level_near_end;
    if ratio > 0.1 {
        log::warn!("time step is coarse next to the horizon: sqrt(refined dt) / level at 0.99 T = {ratio:.3}");
    }
}

/// Estimate `E ∫_0^T (x_s - x̂_s)^2 ds` and the number of samples used under `policy`.
pub fn simulate_policy(model: &ProcessModel, policy: &PolicyArtifact, cfg: &SimConfig) -> Result<SimulationReport> {
    model.validate()?;
    policy.validate()?;
    cfg.validate(model.horizon)?;
    let rule = rule_for(model, policy)?;
    warn_if_coarse(&rule, model.horizon, cfg.dt);
    let grid = breakpoints(model.horizon, cfg.dt, &extra_breakpoints(&rule));
    let sim = PathSim {
        model,
        rule: &rule,
        cfg,
        grid: &grid,
    };
    let outcomes: Vec<PathOutcome> = (0..cfg.n_paths).into_par_iter().map(|i| sim.run(i, None)).collect();
    let (dist, dist_se) = mean_and_se(&cfg.units(outcomes.iter().map(|o| o.distortion).collect()));
    let (used, used_se) = mean_and_se(&cfg.units(outcomes.iter().map(|o| o.samples as f64).collect()));
    let half_t2 = 0.5 * model.horizon * model.horizon;
    Ok(SimulationReport {
        policy_id: policy.id(),
        seed: cfg.seed,
        n_paths: cfg.n_paths,
        dt: cfg.dt,
        horizon: model.horizon,
        mean_distortion: dist,
        std_error: dist_se,
        distortion_coefficient: dist / half_t2,
        coefficient_std_error: dist_se / half_t2,
        mean_samples_used: used,
        samples_std_error: used_se,
    })
}

/// Trace of a single path under `policy`: state, estimate and running distortion.
pub fn trace_path(model: &ProcessModel, policy: &PolicyArtifact, cfg: &SimConfig, path: usize) -> Result<Vec<TraceRow>> {
    model.validate()?;
    policy.validate()?;
    cfg.validate(model.horizon)?;
    let rule = rule_for(model, policy)?;
    let grid = breakpoints(model.horizon, cfg.dt, &extra_breakpoints(&rule));
    let sim = PathSim {
        model,
        rule: &rule,
        cfg,
        grid: &grid,
    };
    let mut rows = Vec::new();
    sim.run(path, Some(&mut rows));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm::{deterministic_policy, optimal_envelope_recursion};

    #[test]
    fn breakpoints_include_sample_times() {
        let pts = breakpoints(1.0, 0.4, &[0.5, 0.25]);
        assert_eq!(pts.len(), 5);
        assert!(pts.contains(&0.5) && pts.contains(&0.25));
        assert_eq!(*pts.last().unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SimConfig::new(0, 1e-3, 1).validate(1.0).is_err());
        assert!(SimConfig::new(10, 0.02, 1).validate(1.0).is_err());
        let mut c = SimConfig::new(3, 1e-3, 1);
        c.antithetic = true;
        assert!(c.validate(1.0).is_err());
    }

    #[test]
    fn envelope_policy_rejected_for_ou() {
        let p = optimal_envelope_recursion(1.0, 1).unwrap().policy;
        let m = ProcessModel::ornstein_uhlenbeck(-1.0, 1.0).unwrap();
        let err = simulate_policy(&m, &p, &SimConfig::new(10, 1e-3, 1)).unwrap_err();
        assert!(matches!(err, SamplingError::IncompatiblePolicy { .. }));
    }

    #[test]
    fn trace_respects_budget_and_jumps() {
        let m = ProcessModel::brownian(1.0).unwrap();
        let p = optimal_envelope_recursion(1.0, 3).unwrap().policy;
        let rows = trace_path(&m, &p, &SimConfig::new(1, 1e-3, 5), 0).unwrap();
        let resets = rows.iter().filter(|r| r.x == r.x_hat && r.t > 0.0).count();
        assert!(resets <= 3 + 1);
        assert!(rows.windows(2).all(|w| w[1].t >= w[0].t));
        assert!(rows.windows(2).all(|w| w[1].cumulative_distortion >= w[0].cumulative_distortion));
    }

    #[test]
    fn uniform_small_run_is_sane() {
        let m = ProcessModel::brownian(1.0).unwrap();
        let p = deterministic_policy(1.0, 3).unwrap().policy;
        let r = simulate_policy(&m, &p, &SimConfig::new(4000, 1e-3, 9)).unwrap();
        assert!((r.mean_distortion - 0.125).abs() < 4.0 * r.std_error);
        assert_eq!(r.mean_samples_used, 3.0);
    }
}
