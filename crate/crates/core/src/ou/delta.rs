//! Threshold (Delta) sampling for the OU signal.
//!
//! A stage that starts at `t` with zero error and level `δ` samples at the exit
//! time `τ` from `(-δ, δ)`. Sampling with error `±δ` removes
//! `δ^2 (e^{2ā(1-τ)} - 1) / (2ā)` from the no-sample distortion, and by Dynkin's
//! formula
//!
//! `J_δ(t) = D0(1 - t) - δ^2 [ (e^{2ā(1-t)} - 1) / (2ā) - W_δ(0, t) ]`,
//!
//! where `W_δ = E[∫_t^{τ∧1} e^{2ā(1-s)} ds]` solves the exit problem with that source.
//! With `k` samples left the later stages add `E[J*_{k-1}(τ) - D0(1 - τ); τ < 1]`,
//! a second exit problem without source and boundary value `J*_{k-1}(t) - D0(1 - t)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pde::{solve_exit_problem, weighted_exit_time};
use super::{check_drift, GridSpec};
use crate::error::{invalid, Result, SamplingError};
use crate::models::{GridTrigger, GriddedThresholds, PolicyArtifact, PolicyVariant};
use crate::numerics::{golden_section, no_sample_distortion, ou_variance, parabolic_vertex};

const SCAN_MIN: f64 = 0.05;
const SCAN_MAX: f64 = 3.0;
const SCAN_STEP: f64 = 0.025;
const REFINE_TOL: f64 = 1e-6;

/// Stage cost at `t = 0` over the δ scan, in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaScan {
    pub deltas: Vec<f64>,
    pub costs: Vec<f64>,
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuDeltaResult {
    /// Stage-start thresholds: with `r` samples left and the last sample at `ζ`, the level is `thresholds[r-1](ζ)`.
    pub policy: PolicyArtifact,
    /// Absolute distortion over `[0, T]` with `k` samples, `k = 1..N`.
    pub distortions: Vec<f64>,
    /// Optimal first-stage level at `t = 0` for each budget, absolute units.
    pub delta_star: Vec<f64>,
    pub scans: Vec<DeltaScan>,
}

fn scan_deltas() -> Vec<f64> {
    let count = ((SCAN_MAX - SCAN_MIN) / SCAN_STEP).round() as usize + 1;
    (0..count).map(|i| SCAN_MIN + i as f64 * SCAN_STEP).collect()
}

/// Single-sample distortion on the unit horizon with a fixed level `delta`; `a` is the normalized drift.
pub fn ou_delta_distortion(a: f64, delta: f64, grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    check_drift(a, 1.0)?;
    let w = weighted_exit_time(a, delta, grid)?;
    Ok(single_stage(a, delta, &w, 0, grid.m_time))
}

fn single_stage(a_bar: f64, delta: f64, w: &[f64], n: usize, m_time: usize) -> f64 {
    let rest = 1.0 - n as f64 / m_time as f64;
    no_sample_distortion(a_bar, rest) - delta * delta * (ou_variance(a_bar, rest) - w[n])
}

struct Context<'a> {
    a_bar: f64,
    grid: &'a GridSpec,
    d0: Vec<f64>,
}

impl Context<'_> {
    /// `J_{k,δ}(t_n)` for all `n`, given `J*_{k-1}` (absent for `k = 1`).
    fn stage_costs(&self, delta: f64, w: &[f64], previous: Option<&[f64]>) -> Result<Vec<f64>> {
        let m = self.grid.m_time;
        let mut cost: Vec<f64> = (0..=m).map(|n| single_stage(self.a_bar, delta, w, n, m)).collect();
        if let Some(prev) = previous {
            let later = solve_exit_problem(
                self.a_bar,
                delta,
                m,
                self.grid.n_x,
                |_| 0.0,
                |n| prev[n] - self.d0[n],
                false,
            )?;
            for (c, u) in cost.iter_mut().zip(&later.center) {
                *c += u;
            }
        }
        Ok(cost)
    }

    fn cost_at_start(&self, delta: f64, previous: Option<&[f64]>) -> Result<f64> {
        let w = weighted_exit_time(self.a_bar, delta, self.grid)?;
        Ok(self.stage_costs(delta, &w, previous)?[0])
    }
}

fn count_local_minima(costs: &[f64]) -> usize {
    let tol = 1e-12 * costs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    let mut minima = 0;
    let mut descending = true;
    for w in costs.windows(2) {
        if w[1] > w[0] + tol {
            if descending {
                minima += 1;
            }
            descending = false;
        } else if w[1] < w[0] - tol {
            descending = true;
        }
    }
    if descending {
        minima += 1;
    }
    minima
}

/// Optimal stage levels by a δ scan per stage start time, innermost stage first.
///
/// For each budget level the scan gives `J*_k(t)` at every grid time (refined by
/// a parabola through the three best scan points), and the `t = 0` optimum is
/// polished by golden-section search.
pub fn ou_delta_optimize(a: f64, horizon: f64, n: usize, grid: &GridSpec) -> Result<OuDeltaResult> {
    check_drift(a, horizon)?;
    grid.validate()?;
    if n == 0 {
        return invalid("budget N must be at least 1");
    }
    let a_bar = a * horizon;
    let m = grid.m_time;
    let times = grid.times();
    let ctx = Context {
        a_bar,
        grid,
        d0: times.iter().map(|t| no_sample_distortion(a_bar, 1.0 - t)).collect(),
    };
    let deltas = scan_deltas();
    let weights: Vec<Vec<f64>> = deltas
        .par_iter()
        .map(|&d| weighted_exit_time(a_bar, d, grid))
        .collect::<Result<_>>()?;

    let sqrt_t = horizon.sqrt();
    let mut previous: Option<Vec<f64>> = None;
    let mut rows = Vec::with_capacity(n);
    let mut distortions = Vec::with_capacity(n);
    let mut delta_star = Vec::with_capacity(n);
    let mut scans = Vec::with_capacity(n);

    for level in 1..=n {
        let prev = previous.as_deref();
        let costs: Vec<Vec<f64>> = deltas
            .par_iter()
            .zip(&weights)
            .map(|(&d, w)| ctx.stage_costs(d, w, prev))
            .collect::<Result<_>>()?;

        let mut star = vec![0.0; m + 1];
        let mut level_delta = vec![0.0; m + 1];
        for j in 0..=m {
            let mut best = 0;
            for i in 1..deltas.len() {
                if costs[i][j] < costs[best][j] {
                    best = i;
                }
            }
            if best > 0 && best + 1 < deltas.len() {
                let (off, val) = parabolic_vertex(SCAN_STEP, costs[best - 1][j], costs[best][j], costs[best + 1][j]);
                star[j] = val;
                level_delta[j] = deltas[best] + off;
            } else {
                star[j] = costs[best][j];
                level_delta[j] = deltas[best];
            }
        }

        let at_start: Vec<f64> = costs.iter().map(|c| c[0]).collect();
        let unimodal = count_local_minima(&at_start) <= 1;
        if !unimodal {
            log::warn!("stage cost over delta is not unimodal at budget {level}; taking the global minimum of the scan");
        }
        let best = (0..deltas.len())
            .min_by(|&x, &y| at_start[x].total_cmp(&at_start[y]))
            .unwrap_or(0);
        if best > 0 && best + 1 < deltas.len() {
            let mut err = None;
            let (d, v) = golden_section(
                |d| match ctx.cost_at_start(d, prev) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                deltas[best - 1],
                deltas[best + 1],
                REFINE_TOL,
            );
            if let Some(e) = err {
                return Err(e);
            }
            if v <= star[0] {
                star[0] = v;
                level_delta[0] = d;
            }
        } else {
            log::warn!(
                "optimal level at budget {level} sits on the scan edge ({}); not refined",
                deltas[best]
            );
        }
        if !star.iter().all(|v| v.is_finite()) {
            return Err(SamplingError::Grid(format!("non-finite stage cost at budget {level}")));
        }

        // Where the cost is flat in δ (little time left) the scan's argmin can wobble; levels
        // are made non-increasing in the stage start time, which changes the cost negligibly.
        let mut running = f64::INFINITY;
        let row: Vec<f64> = level_delta
            .iter()
            .map(|d| {
                running = running.min(*d);
                running * sqrt_t
            })
            .collect();

        distortions.push(star[0] * horizon * horizon);
        delta_star.push(level_delta[0] * sqrt_t);
        scans.push(DeltaScan {
            deltas: deltas.clone(),
            costs: at_start,
            unimodal,
        });
        rows.push(row);
        previous = Some(star);
    }

    let table = GriddedThresholds {
        time_grid: times.iter().map(|t| t * horizon).collect(),
        thresholds: rows,
        trigger: GridTrigger::StageStart,
        drift_a: a,
    };
    Ok(OuDeltaResult {
        policy: PolicyArtifact::new(n, horizon, PolicyVariant::GriddedThresholds(table))?,
        distortions,
        delta_star,
        scans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> GridSpec {
        GridSpec {
            m_time: 400,
            x_half_width: 5.0,
            n_x: 201,
        }
    }

    #[test]
    fn huge_level_gives_no_sample_cost() {
        let a = -0.7;
        let d = ou_delta_distortion(a, 5.0, &GridSpec::pde_default()).unwrap();
        let none = no_sample_distortion(a, 1.0);
        assert!(d <= none);
        assert!((d - none).abs() < 1e-4 * none, "{d} vs {none}");
    }

    #[test]
    fn brownian_limit_single_stage() {
        let d = ou_delta_distortion(1e-6, 0.9391, &GridSpec::pde_default()).unwrap();
        assert!((d - 0.3953 / 2.0).abs() < 0.01 * 0.19765);
    }

    #[test]
    fn local_minima_counting() {
        assert_eq!(count_local_minima(&[3.0, 2.0, 1.0, 2.0, 3.0]), 1);
        assert_eq!(count_local_minima(&[3.0, 1.0, 2.0, 0.5, 3.0]), 2);
        assert_eq!(count_local_minima(&[3.0, 2.0, 1.0]), 1);
    }

    #[test]
    fn more_budget_never_hurts() {
        let r = ou_delta_optimize(-1.0, 1.0, 2, &coarse()).unwrap();
        assert!(r.distortions[1] <= r.distortions[0]);
        assert!(r.distortions[0] < no_sample_distortion(-1.0, 1.0));
        assert!(r.scans.iter().all(|s| s.unimodal));
    }
}
