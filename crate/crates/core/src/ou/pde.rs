//! Backward parabolic solves on the stage domain `[-δ, δ] × [0, 1]`.
//!
//! The operator is `L u = u_xx / 2 + ā x u_x`. Time stepping is Crank–Nicolson
//! with two backward-Euler steps next to `t = 1` to damp the start-up
//! oscillation; space uses central differences.

use super::{GridSpec, ValueGrid};
use crate::error::{invalid, Result, SamplingError};
use crate::numerics::solve_tridiagonal;

const BACKWARD_EULER_STEPS: usize = 2;
const BLOWUP: f64 = 1e8;

pub(crate) struct ExitSolve {
    /// `u(0, t_n)` for `n = 0..=m_time`.
    pub center: Vec<f64>,
    /// Full `u(x_i, t_n)` when requested.
    pub full: Option<Vec<Vec<f64>>>,
}

/// Solve `u_t + L u + f(t) = 0` on `(-δ, δ)`, with `u(±δ, t_n) = g_n` and `u(x, 1) = 0`.
pub(crate) fn solve_exit_problem<F, G>(
    a_bar: f64,
    delta: f64,
    m_time: usize,
    n_x: usize,
    source: F,
    boundary: G,
    keep_full: bool,
) -> Result<ExitSolve>
where
    F: Fn(f64) -> f64,
    G: Fn(usize) -> f64,
{
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    let h = 1.0 / m_time as f64;
    let dx = 2.0 * delta / (n_x - 1) as f64;
    let inner = n_x - 2;
    let xs: Vec<f64> = (1..=inner).map(|i| -delta + i as f64 * dx).collect();
    let diff = 0.5 / (dx * dx);
    let lo: Vec<f64> = xs.iter().map(|x| diff - a_bar * x / (2.0 * dx)).collect();
    let up: Vec<f64> = xs.iter().map(|x| diff + a_bar * x / (2.0 * dx)).collect();
    let mid = -2.0 * diff;

    let mut u = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    let (mut a_l, mut a_d, mut a_u) = (vec![0.0; inner], vec![0.0; inner], vec![0.0; inner]);
    let mut scratch = Vec::with_capacity(inner);
    let center_inner = inner / 2;
    let mut center = vec![0.0; m_time + 1];
    center[m_time] = 0.0;
    let mut full = keep_full.then(|| vec![Vec::new(); m_time + 1]);
    let with_edges = |u: &[f64], g: f64| {
        let mut row = Vec::with_capacity(n_x);
        row.push(g);
        row.extend_from_slice(u);
        row.push(g);
        row
    };
    if let Some(f) = full.as_mut() {
        f[m_time] = with_edges(&u, boundary(m_time));
    }

    for n in (0..m_time).rev() {
        let theta = if m_time - n <= BACKWARD_EULER_STEPS { 1.0 } else { 0.5 };
        let (t_now, t_next) = (n as f64 * h, (n + 1) as f64 * h);
        let (g_now, g_next) = (boundary(n), boundary(n + 1));
        let f_mix = h * (theta * source(t_now) + (1.0 - theta) * source(t_next));
        let explicit = (1.0 - theta) * h;
        for i in 0..inner {
            let left = if i == 0 { g_next } else { u[i - 1] };
            let right = if i + 1 == inner { g_next } else { u[i + 1] };
            rhs[i] = u[i] + explicit * (lo[i] * left + mid * u[i] + up[i] * right) + f_mix;
            a_l[i] = -theta * h * lo[i];
            a_d[i] = 1.0 - theta * h * mid;
            a_u[i] = -theta * h * up[i];
        }
        rhs[0] += theta * h * lo[0] * g_now;
        rhs[inner - 1] += theta * h * up[inner - 1] * g_now;
        solve_tridiagonal(&a_l, &a_d, &a_u, &mut rhs, &mut scratch);
        std::mem::swap(&mut u, &mut rhs);
        if u.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return Err(SamplingError::PdeInstability {
                m_time,
                n_x,
                delta,
            });
        }
        center[n] = u[center_inner];
        if let Some(f) = full.as_mut() {
            f[n] = with_edges(&u, g_now);
        }
    }
    Ok(ExitSolve { center, full })
}

/// `E[∫_t^{τ∧1} e^{2ā(1-s)} ds]` started from `x = 0` at each grid time, for exit level `delta`.
pub(crate) fn weighted_exit_time(a_bar: f64, delta: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    Ok(solve_exit_problem(
        a_bar,
        delta,
        grid.m_time,
        grid.n_x,
        |t| (2.0 * a_bar * (1.0 - t)).exp(),
        |_| 0.0,
        false,
    )?
    .center)
}

/// Solve `U_xx / 2 + ā x U_x + U_t + e^{-2ā t} = 0` on `[-δ, δ] × [0, 1]` with zero
/// boundary and terminal values. Here `a` is the normalized drift.
pub fn ou_delta_pde(a: f64, delta: f64, grid: &GridSpec) -> Result<ValueGrid> {
    grid.validate()?;
    if !a.is_finite() {
        return invalid("drift must be finite");
    }
    // Solved in the rescaled form e^{2ā} U, whose source e^{2ā(1-t)} stays O(1) at the horizon.
    let solve = solve_exit_problem(
        a,
        delta,
        grid.m_time,
        grid.n_x,
        |t| (2.0 * a * (1.0 - t)).exp(),
        |_| 0.0,
        true,
    )?;
    let scale = (-2.0 * a).exp();
    let values: Vec<Vec<f64>> = solve
        .full
        .unwrap_or_default()
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * scale).collect())
        .collect();
    let dx = 2.0 * delta / (grid.n_x - 1) as f64;
    let c = (grid.n_x - 1) / 2;
    let states = (0..grid.n_x)
        .map(|i| (i as f64 - c as f64) * dx)
        .collect();
    Ok(ValueGrid {
        times: grid.times(),
        states,
        values,
        thresholds: vec![delta; grid.m_time + 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GridSpec {
        GridSpec {
            m_time: 400,
            x_half_width: 5.0,
            n_x: 201,
        }
    }

    #[test]
    fn terminal_and_boundary_slices_vanish() {
        let g = ou_delta_pde(0.7, 0.8, &small()).unwrap();
        assert!(g.values[g.times.len() - 1].iter().all(|&v| v == 0.0));
        for row in &g.values {
            assert_eq!(row[0], 0.0);
            assert_eq!(row[row.len() - 1], 0.0);
        }
    }

    #[test]
    fn brownian_exit_time_matches_closed_form() {
        // a = 0 and a very wide domain: u(0, t) -> 1 - t.
        let grid = small();
        let u = weighted_exit_time(0.0, 12.0, &grid).unwrap();
        for (n, v) in u.iter().enumerate() {
            let t = n as f64 / grid.m_time as f64;
            assert!((v - (1.0 - t)).abs() < 1e-6, "t = {t}: {v}");
        }
        // Stationary limit of E[min(τ, 1)] is bounded by δ^2.
        let tight = weighted_exit_time(0.0, 0.2, &grid).unwrap();
        assert!(tight[0] < 0.04 + 1e-6);
    }

    #[test]
    fn solution_is_even_in_x() {
        let g = ou_delta_pde(-1.3, 1.1, &small()).unwrap();
        for row in &g.values {
            let n = row.len();
            for i in 0..n / 2 {
                assert!((row[i] - row[n - 1 - i]).abs() < 1e-12);
            }
        }
    }
}
