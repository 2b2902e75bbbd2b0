//! A Poisson counter sampled either at its jumps or periodically.
//!
//! Sampling at every jump with a hold estimate makes the error identically zero.
//! Periodic sampling at rate `λ` with the drift estimate `N_d + λ (t - d)` leaves
//! a compensated-Poisson error with expected distortion `T / 2` when `λT` is an integer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::error::{invalid, Result};
use crate::numerics::mean_and_se;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonPath {
    pub path: usize,
    pub adaptive_distortion: f64,
    pub deterministic_distortion: f64,
    pub adaptive_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonDemoReport {
    pub rate: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub adaptive_distortion: f64,
    pub adaptive_distortion_se: f64,
    pub deterministic_distortion: f64,
    pub deterministic_distortion_se: f64,
    /// Samples per unit time under jump-triggered sampling.
    pub adaptive_rate: f64,
    pub adaptive_rate_se: f64,
}

/// `∫_0^len (v + slope s)^2 ds`.
fn quadratic_piece(v: f64, slope: f64, len: f64) -> f64 {
    len * (v * v + v * slope * len + slope * slope * len * len / 3.0)
}

fn run_path(rate: f64, horizon: f64, cfg: &SimConfig, path: usize) -> PoissonPath {
    let mut rng = cfg.rng(path);
    let mut jumps = Vec::new();
    let mut t = rng.exponential(rate);
    while t <= horizon {
        jumps.push(t);
        t += rng.exponential(rate);
    }

    // Jump-triggered: the estimate is N at the latest jump, so the error restarts at 0 after each jump.
    let mut adaptive = 0.0;
    let mut last = 0.0;
    let mut err = 0.0;
    for &tj in jumps.iter().chain(std::iter::once(&horizon)) {
        adaptive += quadratic_piece(err, 0.0, tj - last);
        err = 0.0;
        last = tj;
    }

    // Periodic: error N_t - N_d - λ (t - d), reset at each d = k / λ.
    let period = 1.0 / rate;
    let mut events: Vec<(f64, bool)> = jumps.iter().map(|&j| (j, true)).collect();
    let mut k = 1.0;
    while k * period <= horizon {
        events.push((k * period, false));
        k += 1.0;
    }
    events.push((horizon, false));
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut deterministic = 0.0;
    let (mut last, mut err) = (0.0, 0.0);
    for (te, is_jump) in events {
        deterministic += quadratic_piece(err, -rate, te - last);
        err -= rate * (te - last);
        last = te;
        if is_jump {
            err += 1.0;
        } else {
            err = 0.0;
        }
    }

    PoissonPath {
        path,
        adaptive_distortion: adaptive,
        deterministic_distortion: deterministic,
        adaptive_samples: jumps.len(),
    }
}

fn check(rate: f64, horizon: f64, cfg: &SimConfig) -> Result<()> {
    if !(rate > 0.0 && rate.is_finite()) {
        return invalid(format!("rate must be positive, got {rate}"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    if cfg.n_paths == 0 {
        return invalid("n_paths must be at least 1");
    }
    Ok(())
}

/// Per-path results; the time step in `cfg` is unused since both schemes integrate exactly.
pub fn poisson_demo_paths(rate: f64, horizon: f64, cfg: &SimConfig) -> Result<Vec<PoissonPath>> {
    check(rate, horizon, cfg)?;
    let plain = SimConfig {
        antithetic: false,
        ..*cfg
    };
    Ok((0..cfg.n_paths)
        .into_par_iter()
        .map(|i| run_path(rate, horizon, &plain, i))
        .collect())
}

pub fn poisson_demo(rate: f64, horizon: f64, cfg: &SimConfig) -> Result<PoissonDemoReport> {
    let paths = poisson_demo_paths(rate, horizon, cfg)?;
    let col = |f: &dyn Fn(&PoissonPath) -> f64| mean_and_se(&paths.iter().map(f).collect::<Vec<_>>());
    let (ad, ad_se) = col(&|p| p.adaptive_distortion);
    let (dd, dd_se) = col(&|p| p.deterministic_distortion);
    let (ar, ar_se) = col(&|p| p.adaptive_samples as f64 / horizon);
    Ok(PoissonDemoReport {
        rate,
        horizon,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        adaptive_distortion: ad,
        adaptive_distortion_se: ad_se,
        deterministic_distortion: dd,
        deterministic_distortion_se: dd_se,
        adaptive_rate: ar,
        adaptive_rate_se: ar_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_piece_matches_integral() {
        // ∫_0^2 (1 - 3s)^2 ds = [s - 3s^2 + 3s^3]_0^2 = 2 - 12 + 24.
        assert!((quadratic_piece(1.0, -3.0, 2.0) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn demo_contrasts_the_schemes() {
        let r = poisson_demo(2.0, 5.0, &SimConfig::new(4000, 1e-2, 11)).unwrap();
        assert_eq!(r.adaptive_distortion, 0.0);
        assert!((r.adaptive_rate - 2.0).abs() < 4.0 * r.adaptive_rate_se);
        assert!((r.deterministic_distortion - 2.5).abs() < 4.0 * r.deterministic_distortion_se);
    }
}
