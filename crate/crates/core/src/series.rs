//! Statistics of the two-sided level-crossing time of Brownian motion, curtailed at a horizon.
//!
//! For `τ_δ = inf{t : |B_t| = δ}` and horizon `T`, everything is a function of
//! the dimensionless `λ = T π^2 / (8 δ^2)`:
//!
//! * `φ(λ) = 1 - 2 δ^2 E[(T - τ)^+] / T^2`, the single-sample threshold cost in units of `T^2/2`;
//! * `ψ(λ) = -2 E[((T - τ)^+)^2] / T^2`, the weight of the terminal term in the multi-sample cost;
//! * `P[τ_δ <= T]`.
//!
//! Two exact expansions are used. For `λ >= 1` the residue (spectral) series in
//! `e^{-(2k+1)^2 λ}` converges in a handful of terms. For small `λ` that series
//! needs ever more terms and cancels catastrophically, so we switch to the
//! method-of-images expansion `1 / cosh(δ sqrt(2s)) = 2 Σ (-1)^n e^{-(2n+1) δ sqrt(2s)}`,
//! whose terms are one-sided first-passage laws with closed-form moments in `erfc`.

use std::f64::consts::PI;

use crate::error::{invalid, Result, SamplingError};
use crate::models::SeriesConfig;
use crate::numerics::{normal_pdf, two_sided_tail};

/// Below this `λ` the image expansion replaces the residue series.
pub const SPECTRAL_MIN_LAMBDA: f64 = 1.0;

/// The dimensionless threshold parameter `λ = T π^2 / (8 δ^2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LambdaParam(f64);

impl LambdaParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("lambda must be positive and finite, got {lambda}"));
        }
        Ok(Self(lambda))
    }

    pub fn from_delta(delta: f64, horizon: f64) -> Result<Self> {
        if !(delta > 0.0) || !(horizon > 0.0) {
            return invalid("delta and horizon must be positive");
        }
        Self::new(lambda_from_delta(delta, horizon))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn lambda_from_delta(delta: f64, horizon: f64) -> f64 {
    horizon * PI * PI / (8.0 * delta * delta)
}

pub fn delta_from_lambda(lambda: f64, horizon: f64) -> f64 {
    PI * (horizon / (8.0 * lambda)).sqrt()
}

/// `Σ_{k>=0} (-1)^k e^{-(2k+1)^2 λ} / (2k+1)^p`.
fn spectral_sum(lambda: f64, power: i32, cfg: &SeriesConfig, series: &'static str) -> Result<f64> {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for k in 0..cfg.max_terms {
        let m = (2 * k + 1) as f64;
        let term = (-m * m * lambda).exp() / m.powi(power);
        let signed = if k % 2 == 0 { term } else { -term };
        sum += signed;
        last = term;
        if term < cfg.abs_tol {
            return Ok(sum);
        }
    }
    Err(SamplingError::SeriesNonConvergence {
        series,
        max_terms: cfg.max_terms,
        last_term: last,
    })
}

/// Curtailed hitting statistics on the unit horizon, from the image expansion.
struct ImageMoments {
    fire: f64,
    residual_1: f64,
    residual_2: f64,
}

fn image_moments(lambda: f64, cfg: &SeriesConfig) -> Result<ImageMoments> {
    let delta = delta_from_lambda(lambda, 1.0);
    let (mut fire, mut r1, mut r2) = (0.0, 0.0, 0.0);
    for n in 0..cfg.max_terms {
        let u = (2 * n + 1) as f64 * delta;
        let ec = two_sided_tail(u);
        let pdf = normal_pdf(u);
        let u2 = u * u;
        // One-sided passage to level u: P[σ <= 1], E[(1-σ)^+], E[((1-σ)^+)^2].
        let p = ec;
        let m1 = (1.0 + u2) * ec - 2.0 * u * pdf;
        let m2 = (1.0 + 2.0 * u2 + u2 * u2 / 3.0) * ec - (10.0 * u + 2.0 * u2 * u) / 3.0 * pdf;
        let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
        fire += sign * p;
        r1 += sign * m1;
        r2 += sign * m2;
        if p.abs().max(m1.abs()).max(m2.abs()) < cfg.abs_tol {
            return Ok(ImageMoments {
                fire,
                residual_1: r1.max(0.0),
                residual_2: r2.max(0.0),
            });
        }
    }
    Err(SamplingError::SeriesNonConvergence {
        series: "image expansion",
        max_terms: cfg.max_terms,
        last_term: f64::NAN,
    })
}

/// Single-sample threshold cost, in units of `T^2 / 2`.
///
/// `φ(λ) = 1 + π^4/(32λ^2) - π^2/(4λ) - (π/λ^2) Σ (-1)^k e^{-(2k+1)^2 λ}/(2k+1)^3`.
pub fn phi(lambda: LambdaParam, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    let l = lambda.value();
    if l < SPECTRAL_MIN_LAMBDA {
        let m = image_moments(l, cfg)?;
        return Ok(1.0 - PI * PI / (4.0 * l) * m.residual_1);
    }
    let s3 = spectral_sum(l, 3, cfg, "phi")?;
    let pi2 = PI * PI;
    Ok(1.0 + pi2 * pi2 / (32.0 * l * l) - pi2 / (4.0 * l) - PI / (l * l) * s3)
}

/// Terminal-weight coefficient of the multi-sample threshold cost, `-2 E[((T-τ)^+)^2] / T^2`.
///
/// `ψ(λ) = -5π^4/(96λ^2) + π^2/(2λ) - 2 + (16/(πλ^2)) Σ (-1)^k e^{-(2k+1)^2 λ}/(2k+1)^5`.
pub fn psi(lambda: LambdaParam, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    let l = lambda.value();
    if l < SPECTRAL_MIN_LAMBDA {
        return Ok(-2.0 * image_moments(l, cfg)?.residual_2);
    }
    let s5 = spectral_sum(l, 5, cfg, "psi")?;
    let pi2 = PI * PI;
    Ok(-5.0 * pi2 * pi2 / (96.0 * l * l) + pi2 / (2.0 * l) - 2.0 + 16.0 / (PI * l * l) * s5)
}

/// `φ(λ) + κ ψ(λ)`: the stage cost minimised by the threshold recursion.
pub fn stage_cost(lambda: LambdaParam, kappa: f64, cfg: &SeriesConfig) -> Result<f64> {
    let p = phi(lambda, cfg)?;
    if kappa == 0.0 {
        return Ok(p);
    }
    Ok(p + kappa * psi(lambda, cfg)?)
}

/// `E[(T - τ_δ)^+]` from the residue expansion of its Laplace inversion.
pub fn residual_moment_1(delta: f64, horizon: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    let l = LambdaParam::from_delta(delta, horizon)?.value();
    if l < SPECTRAL_MIN_LAMBDA {
        return Ok(horizon * image_moments(l, cfg)?.residual_1);
    }
    // Residue at s_k = -(2k+1)^2 λ / T, with the closed-form tails summed exactly.
    let s3 = spectral_sum(l, 3, cfg, "residual_moment_1")?;
    let pi3 = PI * PI * PI;
    Ok(4.0 * horizon / (PI * l) * (s3 - pi3 / 32.0 + l * PI / 4.0))
}

/// `E[((T - τ_δ)^+)^2]` from the residue expansion.
pub fn residual_moment_2(delta: f64, horizon: f64, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    let l = LambdaParam::from_delta(delta, horizon)?.value();
    if l < SPECTRAL_MIN_LAMBDA {
        return Ok(horizon * horizon * image_moments(l, cfg)?.residual_2);
    }
    let s5 = spectral_sum(l, 5, cfg, "residual_moment_2")?;
    let pi = PI;
    let closed = -5.0 * pi.powi(5) / 1536.0 + l * pi.powi(3) / 32.0 - 0.5 * l * l * pi / 4.0;
    Ok(-8.0 * horizon * horizon / (pi * l * l) * (s5 + closed))
}

/// `Υ(T, α, δ) = T^2/2 - δ^2 E[(T-τ)^+] - (1/2 - α) E[((T-τ)^+)^2]`, assembled from the moments.
pub fn upsilon(horizon: f64, alpha: f64, delta: f64, cfg: &SeriesConfig) -> Result<f64> {
    let m1 = residual_moment_1(delta, horizon, cfg)?;
    let m2 = residual_moment_2(delta, horizon, cfg)?;
    Ok(0.5 * horizon * horizon - delta * delta * m1 - (0.5 - alpha) * m2)
}

/// `P[τ_δ <= T] = 1 - (4/π) Σ (-1)^k e^{-(2k+1)^2 λ} / (2k+1)`.
pub fn firing_probability(lambda: LambdaParam, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    let l = lambda.value();
    let p = if l < SPECTRAL_MIN_LAMBDA {
        image_moments(l, cfg)?.fire
    } else {
        1.0 - 4.0 / PI * spectral_sum(l, 1, cfg, "firing_probability")?
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Laplace transform of the exit time from `(-δ, δ)` started at `w0`:
/// `E[e^{-s τ}] = cosh(w0 sqrt(2s)) / cosh(δ sqrt(2s))`.
pub fn mgf_first_hitting(s: f64, delta: f64, w0: f64) -> Result<f64> {
    if !(s >= 0.0) || !(delta > 0.0) {
        return invalid("need s >= 0 and delta > 0");
    }
    if w0.abs() > delta {
        return invalid(format!("|w0| = {} exceeds the threshold {delta}", w0.abs()));
    }
    let r = (2.0 * s).sqrt();
    if r * delta <= 700.0 {
        return Ok((w0 * r).cosh() / (delta * r).cosh());
    }
    let w = w0.abs();
    Ok(((w - delta) * r).exp() * (1.0 + (-2.0 * w * r).exp()) / (1.0 + (-2.0 * delta * r).exp()))
}

/// `Σ_{k>=0} (-1)^k / (2k+1)^p` for `p ∈ {1, 3, 5}`.
///
/// `p = 1` converges too slowly for partial sums and uses the
/// Cohen–Rodriguez Villegas–Zagier acceleration; `p = 3, 5` are summed
/// directly with the usual half-term correction at the cut.
pub fn alternating_series_constant(power: u32, cfg: &SeriesConfig) -> Result<f64> {
    cfg.validate()?;
    let a = |k: usize| 1.0 / ((2 * k + 1) as f64).powi(power as i32);
    match power {
        1 => {
            let n = (((2.0 / cfg.abs_tol).ln() / (3.0 + 8f64.sqrt()).ln()).ceil() as usize)
                .clamp(1, cfg.max_terms);
            let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
            d = (d + 1.0 / d) / 2.0;
            let (mut b, mut c, mut s) = (-1.0, -d, 0.0);
            for k in 0..n {
                c = b - c;
                s += c * a(k);
                let (kf, nf) = (k as f64, n as f64);
                b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
            }
            Ok(s / d)
        }
        3 | 5 => {
            let mut sum = 0.0;
            let mut k = 0;
            while k < cfg.max_terms {
                let t = a(k);
                sum += if k % 2 == 0 { t } else { -t };
                k += 1;
                if t < cfg.abs_tol {
                    break;
                }
            }
            let next = a(k);
            Ok(sum + if k % 2 == 0 { 0.5 * next } else { -0.5 * next })
        }
        _ => invalid(format!("power must be 1, 3 or 5, got {power}")),
    }
}
