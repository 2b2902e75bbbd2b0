//! Sampling policies for the Ornstein-Uhlenbeck signal `dx = a x dt + dW`.
//!
//! Every solver works on the unit horizon with drift `ā = a T`: with `t̄ = t / T`
//! and `x̄ = x / sqrt(T)` the normalized process has unit diffusion, so
//! distortions scale back by `T^2` and thresholds by `sqrt(T)`. Negative `a` is
//! the stable case.

mod delta;
mod dp;
mod pde;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{no_sample_distortion, ou_variance};

pub use delta::{ou_delta_distortion, ou_delta_optimize, OuDeltaResult, DeltaScan};
pub use dp::{ou_dp_optimal, DpSolution};
pub use pde::ou_delta_pde;

/// Discretization of the normalized `[0, 1]` horizon and the state axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m_time: usize,
    /// State extent for the dynamic program, in normalized units. The PDE lives on `[-δ, δ]` and ignores it.
    pub x_half_width: f64,
    /// Odd, so that `x = 0` is a node.
    pub n_x: usize,
}

impl GridSpec {
    /// Defaults for the threshold PDE.
    pub fn pde_default() -> Self {
        Self {
            m_time: 2000,
            x_half_width: 5.0,
            n_x: 401,
        }
    }

    /// Defaults for the dynamic program at normalized drift `a_bar`.
    ///
    /// The transition kernel is point-sampled on the state grid, which needs the
    /// one-step standard deviation `sqrt(1 / m_time)` to be at least the node
    /// spacing; hence the finer state grid than the PDE uses.
    pub fn dp_default(a_bar: f64) -> Self {
        let spread = ou_variance(a_bar, 1.0).sqrt().max(1.0);
        let stationary = if a_bar < 0.0 { (-0.5 / a_bar).sqrt() } else { 0.0 };
        Self {
            m_time: 2000,
            x_half_width: 5.0 * spread.max(stationary),
            n_x: 1001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_time < 100 {
            return invalid(format!("m_time must be at least 100, got {}", self.m_time));
        }
        if self.n_x < 201 || self.n_x.is_multiple_of(2) {
            return invalid(format!("n_x must be odd and at least 201, got {}", self.n_x));
        }
        if !(self.x_half_width > 0.0 && self.x_half_width.is_finite()) {
            return invalid("x_half_width must be positive");
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.m_time).map(|n| n as f64 / self.m_time as f64).collect()
    }
}

/// Time by state table of a value function or PDE solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// `values[n][i]` at `(times[n], states[i])`.
    pub values: Vec<Vec<f64>>,
    /// Stopping boundary per time (for a PDE solve, the fixed domain edge).
    pub thresholds: Vec<f64>,
}

impl ValueGrid {
    pub fn center_index(&self) -> usize {
        self.states.len() / 2
    }

    /// Value at `x = 0` over time.
    pub fn at_origin(&self) -> Vec<f64> {
        let c = self.center_index();
        self.values.iter().map(|row| row[c]).collect()
    }
}

fn check_drift(a: f64, horizon: f64) -> Result<()> {
    if !a.is_finite() {
        return invalid("drift must be finite");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    Ok(())
}

/// Distortion of `N` uniformly spaced samples: `(N + 1) (e^{2aL} - 1 - 2aL) / (4a^2)` with `L = T / (N + 1)`.
///
/// Continuous at `a = 0`, where it equals the Brownian value `T^2 / (2 (N + 1))`.
pub fn ou_deterministic(a: f64, horizon: f64, n: usize) -> Result<f64> {
    check_drift(a, horizon)?;
    if n == 0 {
        return invalid("budget N must be at least 1");
    }
    let len = horizon / (n + 1) as f64;
    Ok((n + 1) as f64 * no_sample_distortion(a, len))
}

/// Distortion with no samples at all over `[0, T]`.
pub fn ou_no_sample_distortion(a: f64, horizon: f64) -> Result<f64> {
    check_drift(a, horizon)?;
    Ok(no_sample_distortion(a, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_values() {
        let e = std::f64::consts::E;
        assert!((ou_deterministic(1.0, 1.0, 1).unwrap() - (e - 2.0) / 2.0).abs() < 1e-12);
        assert!((ou_deterministic(1e-6, 1.0, 3).unwrap() - 0.125).abs() < 1e-4);
        // a = -1, N = 1: 2 (e^{-1} - 1 + 1) / 4.
        assert!((ou_deterministic(-1.0, 1.0, 1).unwrap() - (-1f64).exp() / 2.0).abs() < 1e-12);
        assert_eq!(ou_deterministic(0.0, 2.0, 1).unwrap(), 1.0);
        assert!(ou_deterministic(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn deterministic_decreases_with_budget() {
        for &a in &[-2.0, 0.5, 1.5] {
            let mut last = ou_no_sample_distortion(a, 1.0).unwrap();
            for n in 1..10 {
                let d = ou_deterministic(a, 1.0, n).unwrap();
                assert!(d < last);
                last = d;
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::pde_default().validate().is_ok());
        assert!(GridSpec::dp_default(-1.0).validate().is_ok());
        let even = GridSpec {
            n_x: 400,
            ..GridSpec::pde_default()
        };
        assert!(even.validate().is_err());
        assert!(GridSpec::dp_default(1.0).x_half_width > 5.0);
    }
}
