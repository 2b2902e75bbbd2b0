use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{Advance, Monitor, Step};
use super::{SimConfig, REFINE_DEPTH};
use crate::error::{invalid, Result};
use crate::numerics::mean_and_se;

/// Monte Carlo statistics of the exit time `τ` of Brownian motion from `(-δ, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingStats {
    pub delta: f64,
    pub horizon: f64,
    pub s: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// `P[τ <= T]`.
    pub p_fire: f64,
    pub p_fire_se: f64,
    /// `E[(T - τ)^+]`.
    pub mean_residual: f64,
    pub mean_residual_se: f64,
    /// `E[((T - τ)^+)^2]`.
    pub mean_residual_sq: f64,
    pub mean_residual_sq_se: f64,
    /// `E[e^{-s τ}]`.
    pub mgf_at_s: f64,
    pub mgf_se: f64,
}

/// Paths run past `T` until they exit or until `e^{-s t}` is below `e^{-40}`.
const MGF_DECAY: f64 = 40.0;

pub fn simulate_hitting_statistics(delta: f64, horizon: f64, s: f64, cfg: &SimConfig) -> Result<HittingStats> {
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return invalid(format!("s must be non-negative, got {s}"));
    }
    cfg.validate(horizon)?;
    let t_end = if s > 0.0 { horizon.max(MGF_DECAY / s) } else { horizon };
    let h = cfg.dt;
    let step = Step::new(0.0, h);
    let exits: Vec<Option<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i);
            let mut monitor = Monitor::new(0.0, h / 2f64.powi(REFINE_DEPTH));
            let (mut t, mut e) = (0.0, 0.0);
            while t < t_end {
                let tn = (t + h).min(t_end);
                let en = if tn - t < h {
                    Step::new(0.0, tn - t).sample(e, &mut rng)
                } else {
                    step.sample(e, &mut rng)
                };
                monitor.pending.push((tn, en));
                if let Advance::Crossed(tau, _) = monitor.advance(&mut t, &mut e, |_| delta, &mut rng, |_, _, _, _| {}) {
                    return Some(tau);
                }
            }
            None
        })
        .collect();

    let stat = |f: &dyn Fn(Option<f64>) -> f64| mean_and_se(&cfg.units(exits.iter().map(|&x| f(x)).collect()));
    let residual = |x: Option<f64>| x.map_or(0.0, |tau| (horizon - tau).max(0.0));
    let (p_fire, p_fire_se) = stat(&|x| if x.is_some_and(|tau| tau <= horizon) { 1.0 } else { 0.0 });
    let (mean_residual, mean_residual_se) = stat(&residual);
    let (mean_residual_sq, mean_residual_sq_se) = stat(&|x| residual(x).powi(2));
    let (mgf_at_s, mgf_se) = if s == 0.0 {
        (1.0, 0.0)
    } else {
        stat(&|x| x.map_or(0.0, |tau| (-s * tau).exp()))
    };
    Ok(HittingStats {
        delta,
        horizon,
        s,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        p_fire,
        p_fire_se,
        mean_residual,
        mean_residual_se,
        mean_residual_sq,
        mean_residual_sq_se,
        mgf_at_s,
        mgf_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unreachable_level_never_fires() {
        let r = simulate_hitting_statistics(1e3, 1.0, 0.0, &SimConfig::new(500, 1e-2, 3)).unwrap();
        assert_eq!(r.p_fire, 0.0);
        assert_eq!(r.mgf_at_s, 1.0);
        assert_eq!(r.mgf_se, 0.0);
    }

    #[test]
    fn rejects_negative_s() {
        assert!(simulate_hitting_statistics(1.0, 1.0, -1.0, &SimConfig::new(10, 1e-2, 3)).is_err());
    }
}
