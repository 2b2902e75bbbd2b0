//! Optimal sampling for the OU signal by backward induction on the AR(1) chain
//! `x_n = e^{ā h} x_{n-1} + w_n`, `w_n ~ N(0, (e^{2āh} - 1) / (2ā))`, `h = 1 / M`.
//!
//! `V_n^k(x)` is the largest expected reduction of the no-sample distortion
//! available from epoch `n` with error `x` and `k` samples left:
//!
//! `V_n^k(x) = max{ x^2 g(1 - t_n) + V_n^{k-1}(0), E[V_{n+1}^k(x_{n+1}) | x_n = x] }`,
//!
//! with `g(L) = (e^{2āL} - 1) / (2ā)`, `V^0 = 0` and `V_M = 0`. Ties go to sampling.

use serde::{Deserialize, Serialize};

use super::{check_drift, GridSpec, ValueGrid};
use crate::error::{invalid, Result, SamplingError};
use crate::models::{GridTrigger, GriddedThresholds, PolicyArtifact, PolicyVariant};
use crate::numerics::{no_sample_distortion, ou_variance, SQRT_2PI};

const KERNEL_SIGMAS: f64 = 8.0;
const MAX_LEAK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpSolution {
    /// Envelope policy checked at the grid epochs: sample once `|e| >= thresholds[r-1](t_n)`.
    pub policy: PolicyArtifact,
    /// Absolute distortion with the full budget.
    pub distortion: f64,
    /// Absolute distortion with `k` samples, `k = 1..N`.
    pub distortions: Vec<f64>,
    /// Value function of the top budget level, normalized units.
    pub values: ValueGrid,
}

/// Banded Gaussian transition matrix on the state grid.
struct Kernel {
    start: Vec<usize>,
    weights: Vec<Vec<f64>>,
    raw_mass: Vec<f64>,
}

impl Kernel {
    fn new(xs: &[f64], decay: f64, sd: f64) -> Self {
        let dx = xs[1] - xs[0];
        let n = xs.len();
        let reach = (KERNEL_SIGMAS * sd / dx).ceil() as isize + 1;
        let c = (n / 2) as isize;
        let mut start = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut raw_mass = Vec::with_capacity(n);
        for &x in xs {
            let mean = decay * x;
            let centre = (mean / dx).round() as isize + c;
            let lo = (centre - reach).clamp(0, n as isize - 1) as usize;
            let hi = (centre + reach).clamp(0, n as isize - 1) as usize;
            let w: Vec<f64> = (lo..=hi)
                .map(|j| {
                    let z = (xs[j] - mean) / sd;
                    if z.abs() <= KERNEL_SIGMAS {
                        (-0.5 * z * z).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = w.iter().sum();
            raw_mass.push(total * dx / (SQRT_2PI * sd));
            start.push(lo);
            weights.push(if total > 0.0 { w.iter().map(|v| v / total).collect() } else { w });
        }
        Self {
            start,
            weights,
            raw_mass,
        }
    }

    fn expect(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let s = self.start[i];
            *o = self.weights[i].iter().zip(&v[s..]).map(|(w, x)| w * x).sum();
        }
    }
}

/// Smallest `|x|` at which sampling is at least as good as waiting, by linear crossing of `stop - continue`.
fn crossing(xs: &[f64], stop: &[f64], cont: &[f64]) -> f64 {
    let c = xs.len() / 2;
    let mut prev = stop[c] - cont[c];
    if prev >= 0.0 {
        return 0.0;
    }
    for i in c + 1..xs.len() {
        let d = stop[i] - cont[i];
        if d >= 0.0 {
            return xs[i - 1] + (xs[i] - xs[i - 1]) * (-prev) / (d - prev);
        }
        prev = d;
    }
    xs[xs.len() - 1]
}

/// Backward induction for budgets `1..=N`; `a` and `horizon` in absolute units.
pub fn ou_dp_optimal(a: f64, horizon: f64, n: usize, grid: &GridSpec) -> Result<DpSolution> {
    check_drift(a, horizon)?;
    grid.validate()?;
    if n == 0 {
        return invalid("budget N must be at least 1");
    }
    let a_bar = a * horizon;
    let m = grid.m_time;
    let h = 1.0 / m as f64;
    if (a_bar * h).abs() > 0.1 {
        return Err(SamplingError::Grid(format!(
            "|ā h| = {} is too large for the AR(1) step; increase m_time",
            (a_bar * h).abs()
        )));
    }
    let nx = grid.n_x;
    let c = nx / 2;
    let dx = grid.x_half_width / c as f64;
    let xs: Vec<f64> = (0..nx).map(|i| (i as f64 - c as f64) * dx).collect();
    let sd = ou_variance(a_bar, h).sqrt();
    if sd < 0.5 * dx {
        return Err(SamplingError::Grid(format!(
            "one-step deviation {sd:.3e} is below half the state spacing {dx:.3e}; increase n_x or decrease m_time"
        )));
    }
    let kernel = Kernel::new(&xs, (a_bar * h).exp(), sd);
    let times: Vec<f64> = (0..=m).map(|k| k as f64 * h).collect();
    let gain: Vec<f64> = times.iter().map(|t| ou_variance(a_bar, 1.0 - t)).collect();
    let total = no_sample_distortion(a_bar, 1.0);

    let mut lower_origin = vec![0.0; m + 1];
    let mut thresholds = Vec::with_capacity(n);
    let mut distortions = Vec::with_capacity(n);
    let mut top_values = Vec::new();
    let mut cont = vec![0.0; nx];
    let mut stop = vec![0.0; nx];

    for level in 1..=n {
        let keep = level == n;
        let mut v = vec![0.0; nx];
        let mut origin = vec![0.0; m + 1];
        let mut thr = vec![0.0; m + 1];
        let mut rows = if keep { vec![Vec::new(); m + 1] } else { Vec::new() };
        if keep {
            rows[m] = v.clone();
        }
        for k in (0..m).rev() {
            kernel.expect(&v, &mut cont);
            for i in 0..nx {
                stop[i] = xs[i] * xs[i] * gain[k] + lower_origin[k];
                v[i] = if stop[i] >= cont[i] { stop[i] } else { cont[i] };
            }
            thr[k] = crossing(&xs, &stop, &cont);
            origin[k] = v[c];
            if keep {
                rows[k] = v.clone();
            }
        }
        let widest = thr.iter().cloned().fold(0.0, f64::max);
        for (i, &x) in xs.iter().enumerate() {
            let leak = (1.0 - kernel.raw_mass[i]).abs();
            if x.abs() < widest && leak > MAX_LEAK {
                return Err(SamplingError::KernelLeakage { leak, x });
            }
        }
        distortions.push((total - origin[0]) * horizon * horizon);
        thresholds.push(thr);
        lower_origin = origin;
        if keep {
            top_values = rows;
        }
    }

    let sqrt_t = horizon.sqrt();
    let table = GriddedThresholds {
        time_grid: times.iter().map(|t| t * horizon).collect(),
        thresholds: thresholds
            .iter()
            .map(|row| row.iter().map(|v| v * sqrt_t).collect())
            .collect(),
        trigger: GridTrigger::Envelope,
        drift_a: a,
    };
    let top = thresholds.pop().unwrap_or_default();
    Ok(DpSolution {
        policy: PolicyArtifact::new(n, horizon, PolicyVariant::GriddedThresholds(table))?,
        distortion: *distortions.last().unwrap_or(&f64::NAN),
        distortions,
        values: ValueGrid {
            times,
            states: xs,
            values: top_values,
            thresholds: top,
        },
    })
}
