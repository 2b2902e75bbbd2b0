//! Per-path random streams and continuous threshold monitoring.
//!
//! Steps are exact OU transitions. Between grid points a threshold crossing is
//! located by recursive bisection with exact bridge midpoints; once a sub-interval
//! is short enough the crossing is decided by the bridge crossing probability
//! (exact for Brownian motion against a linear boundary).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::ou_variance;

/// Sub-intervals with a crossing probability below this are taken as crossing-free.
const NEGLIGIBLE: f64 = 1e-10;
/// `e^{-24} < NEGLIGIBLE / 2`.
const NEGLIGIBLE_EXPONENT: f64 = 24.0;

pub(crate) struct PathRng {
    rng: ChaCha8Rng,
    negate: bool,
}

impl PathRng {
    pub fn new(seed: u64, stream: u64, negate: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, negate }
    }

    pub fn normal(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        if self.negate {
            -z
        } else {
            z
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        // 1 - U lies in (0, 1].
        -(1.0 - self.uniform()).ln() / rate
    }
}

/// Transition of `de = a e dt + dW` over a fixed step.
#[derive(Clone, Copy)]
pub(crate) struct Step {
    pub decay: f64,
    pub sd: f64,
}

impl Step {
    pub fn new(a: f64, h: f64) -> Self {
        Self {
            decay: (a * h).exp(),
            sd: ou_variance(a, h).sqrt(),
        }
    }

    pub fn sample(&self, e: f64, rng: &mut PathRng) -> f64 {
        self.decay * e + self.sd * rng.normal()
    }
}

/// Bisection state for one path.
pub(crate) struct Monitor {
    pub a: f64,
    pub min_span: f64,
    /// Known future points `(t, e)`, nearest last.
    pub pending: Vec<(f64, f64)>,
}

pub(crate) enum Advance {
    /// All pending points consumed; the path sits at the last one.
    Done,
    /// The level was reached at `(τ, e_τ)`; later pending points are kept.
    Crossed(f64, f64),
}

impl Monitor {
    pub fn new(a: f64, min_span: f64) -> Self {
        Self {
            a,
            min_span,
            pending: Vec::with_capacity(32),
        }
    }

    fn bridge_mid(&self, e0: f64, e1: f64, span: f64, rng: &mut PathRng) -> f64 {
        let half = 0.5 * span;
        let mean = (e0 + e1) / (2.0 * (self.a * half).cosh());
        let var = ou_variance(self.a, half) / (1.0 + (self.a * span).exp());
        mean + var.sqrt() * rng.normal()
    }

    /// Walk `(t, e)` through the pending points until they run out or `|e|` reaches `level`.
    ///
    /// `segment` is called for every piece of path traversed, with its endpoints.
    pub fn advance<L, S>(&mut self, t: &mut f64, e: &mut f64, level: L, rng: &mut PathRng, mut segment: S) -> Advance
    where
        L: Fn(f64) -> f64,
        S: FnMut(f64, f64, f64, f64),
    {
        while let Some(&(tn, en)) = self.pending.last() {
            let span = tn - *t;
            let (b0, b1) = (level(*t), level(tn));
            let outside = en.abs() >= b1;
            let (p_up, p_down) = if outside {
                (1.0, 0.0)
            } else {
                let q = ou_variance(self.a, span).max(f64::MIN_POSITIVE);
                let x_up = 2.0 * (b0 - *e) * (b1 - en) / q;
                let x_down = 2.0 * (b0 + *e) * (b1 + en) / q;
                if x_up.min(x_down) > NEGLIGIBLE_EXPONENT {
                    (0.0, 0.0)
                } else {
                    ((-x_up).exp(), (-x_down).exp())
                }
            };
            let p = (p_up + p_down).min(1.0);
            if !outside && p < NEGLIGIBLE {
                segment(*t, *e, tn, en);
                *t = tn;
                *e = en;
                self.pending.pop();
                continue;
            }
            if span > self.min_span {
                let em = self.bridge_mid(*e, en, span, rng);
                self.pending.push((*t + 0.5 * span, em));
                continue;
            }
            let hit = if outside {
                let s = en.signum();
                let denom = s * (en - *e) - (b1 - b0);
                let frac = if denom > 0.0 { ((b0 - s * *e) / denom).clamp(0.0, 1.0) } else { 1.0 };
                let tau = *t + frac * span;
                Some((tau, s * level(tau)))
            } else {
                let u = rng.uniform();
                (u < p).then(|| {
                    let tau = *t + 0.5 * span;
                    let s = if u * (p_up + p_down) < p_up * p { 1.0 } else { -1.0 };
                    (tau, s * level(tau))
                })
            };
            match hit {
                Some((tau, etau)) => {
                    segment(*t, *e, tau, etau);
                    *t = tau;
                    *e = etau;
                    return Advance::Crossed(tau, etau);
                }
                None => {
                    segment(*t, *e, tn, en);
                    *t = tn;
                    *e = en;
                    self.pending.pop();
                }
            }
        }
        Advance::Done
    }

    /// Move pending points into the frame of an estimate reset at `(tau, e_tau)`.
    pub fn reset(&mut self, tau: f64, e_tau: f64) {
        for (ts, es) in self.pending.iter_mut() {
            *es -= e_tau * (self.a * (*ts - tau)).exp();
        }
    }
}
